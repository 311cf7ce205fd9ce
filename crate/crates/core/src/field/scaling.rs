use crate::kernels::KernelSpec;

/// Transports a window energy from the unit-density class back to density
/// `m`.
///
/// `w` is `W_{η m^{1/d}}(Ê, m^{1/d} A)` for the rescaled field
/// `Ê = m^{-(s+1)/d} E(m^{-1/d} ·)` and `volume = |A|`. Returns
/// `(W_η(E, A), η m^{1/d})`: the energy of the original field and the
/// truncation radius at which `Ê` must be evaluated. Per unit volume this is
/// `m^{1+s/d} ŵ` for Riesz kernels and `m(ŵ − (c_{s,d}/d) log m)` for the
/// logarithmic ones, with `ŵ = w / |m^{1/d} A|`.
pub fn rescale_energy(w: f64, m: f64, eta: f64, volume: f64, spec: &KernelSpec) -> (f64, f64) {
    let d = spec.d as f64;
    let eta_hat = eta * m.powf(1.0 / d);
    let energy = if spec.is_log() {
        w - spec.csd / d * m.ln() * m * volume
    } else {
        m.powf(spec.s() / d) * w
    };
    (energy, eta_hat)
}
