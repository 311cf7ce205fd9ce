"""Smoke test for the rieszpy extension module."""

import math

import rieszpy


def main():
    k = rieszpy.KernelSpec.log2d()
    assert k.d == 2 and k.k == 0
    assert abs(k.csd() - 2 * math.pi) < 1e-12
    assert abs(k.g([3.0, 4.0]) + math.log(5.0)) < 1e-12

    points, info = rieszpy.minimize(k, 12, seed=1)
    assert len(points) == 12 and all(len(p) == 2 for p in points)
    assert abs(rieszpy.hamiltonian(k, 1.0, points) - info["energy"]) < 1e-9 * abs(info["energy"])
    print("minimize:", info)

    r = rieszpy.KernelSpec.riesz(0.5, 1)
    rep = rieszpy.window_energy(
        r, [[0.5], [1.5]], [0.0], [2.0], 0.1, background=([0.0], [2.0])
    )
    assert rep["point_count"] == 2
    print("window energy:", rep["w_eta"])

    fit = rieszpy.lattice_decay_fit(r, [0.25, 0.5, 1.0, 2.0], radius=100)
    assert fit["pass"], fit
    print("lattice exponent:", fit["exponent"])

    try:
        rieszpy.KernelSpec.riesz(3.0, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("s >= d must be rejected")
    print("ok")


if __name__ == "__main__":
    main()
