//! Performance theory: the destination-SNR distribution, a numeric
//! exact-BER integral, its high-SNR closed form, and the optimal power split.
//!
//! With equal source powers, `lambda = p_s/p_r` and `psi_s = p_s/N0`, the
//! differential destination SNR has the density of a scaled two-hop harmonic
//! mean, expressible through `K0`/`K1`. The BER follows from
//! `E[Q(sqrt(2X))] = (1/(2*sqrt(pi))) * int_0^inf exp(-x) F_X(x) x^(-1/2) dx`,
//! which has no closed form; at high SNR a first-order expansion of the CDF
//! collapses it to `(1+lambda)*(1/psi_s + 1/psi_r') / 2`.

pub mod quad;
pub mod special;

pub use special::{bessel_k0, bessel_k0_k1, bessel_k1, gaussian_q};

use crate::channel::NoiseModel;
use crate::relay::PowerProfile;
use crate::{Error, Result};
use quad::adaptive_simpson;

/// Operating point of the BER theory: power ratio `lambda = p_s/p_r` and
/// per-source SNR `psi_s = p_s/N0`.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticBerInput {
    lambda: f64,
    psi_s: f64,
}

impl AsymptoticBerInput {
    pub fn new(lambda: f64, psi_s: f64) -> Result<Self> {
        if lambda <= 0.0 || psi_s <= 0.0 || !lambda.is_finite() || !psi_s.is_finite() {
            return Err(Error::Domain(format!(
                "need lambda > 0 and psi_s > 0, got lambda = {lambda}, psi_s = {psi_s}"
            )));
        }
        Ok(Self { lambda, psi_s })
    }

    /// Operating point of a concrete power profile at a concrete noise level.
    pub fn from_power(pw: &PowerProfile, noise: &NoiseModel) -> Self {
        Self {
            lambda: pw.lambda(),
            psi_s: pw.psi_s(noise),
        }
    }

    /// Operating point under the total-power constraint `2*p_s + p_r = p`,
    /// which fixes `psi_s = lambda*p / ((2*lambda + 1)*N0)`.
    pub fn from_constraint(lambda: f64, p: f64, n0: f64) -> Result<Self> {
        if p <= 0.0 || n0 <= 0.0 || p.is_nan() || n0.is_nan() {
            return Err(Error::Domain(format!(
                "need p > 0 and n0 > 0, got p = {p}, n0 = {n0}"
            )));
        }
        Self::new(lambda, lambda * p / ((2.0 * lambda + 1.0) * n0))
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn psi_s(&self) -> f64 {
        self.psi_s
    }

    pub fn psi_r(&self) -> f64 {
        self.psi_s / self.lambda
    }

    /// `(1 + lambda) * psi_r`.
    pub fn psi_r_prime(&self) -> f64 {
        (1.0 + self.lambda) * self.psi_r()
    }
}

/// High-SNR BER, `(1 + lambda) * (1/psi_s + 1/psi_r') / 2`.
pub fn asymptotic_ber(input: &AsymptoticBerInput) -> f64 {
    let inv = 1.0 / input.psi_s() + 1.0 / input.psi_r_prime();
    0.5 * (1.0 + input.lambda()) * inv
}

/// Density of the differential destination SNR `X` at `x`.
///
/// Convenience wrapper over [`SnrDistribution::pdf`] for one-off evaluations.
pub fn gamma_d_pdf(x: f64, input: &AsymptoticBerInput) -> Result<f64> {
    SnrDistribution::params_only(*input).pdf(x)
}

/// Distribution of the differential destination SNR: exact density with
/// `K0`/`K1`, a CDF cached on a square-root-spaced grid, and the first-order
/// exponential approximation that the closed-form BER is built from.
#[derive(Debug, Clone)]
pub struct SnrDistribution {
    input: AsymptoticBerInput,
    /// Density prefactor `8*(1+lambda)^2 / (psi_s*psi_r')`.
    prefactor: f64,
    /// Exponential decay rate `2*(1+lambda)*(1/psi_s + 1/psi_r')`.
    rate: f64,
    /// Bessel argument scale `4*(1+lambda)/sqrt(psi_s*psi_r')`.
    bessel_scale: f64,
    /// `(psi_s + psi_r') / sqrt(psi_s*psi_r')`.
    balance: f64,
    /// CDF samples on `x = (k*du)^2`, `k = 0..=panels`.
    cdf_grid: Vec<f64>,
    du: f64,
}

/// Gauss-Legendre 4-point nodes (+/-) and weights on [-1, 1].
const GL4_NODES: [f64; 2] = [0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GL4_WEIGHTS: [f64; 2] = [0.652_145_154_862_546_2, 0.347_854_845_137_453_9];

impl SnrDistribution {
    /// Builds the distribution and caches its CDF.
    pub fn new(input: AsymptoticBerInput) -> Result<Self> {
        let mut dist = Self::params_only(input);
        dist.build_cdf_cache()?;
        Ok(dist)
    }

    fn params_only(input: AsymptoticBerInput) -> Self {
        let psi_s = input.psi_s();
        let psi_rp = input.psi_r_prime();
        let one_plus = 1.0 + input.lambda();
        Self {
            input,
            prefactor: 8.0 * one_plus * one_plus / (psi_s * psi_rp),
            rate: 2.0 * one_plus * (1.0 / psi_s + 1.0 / psi_rp),
            bessel_scale: 4.0 * one_plus / (psi_s * psi_rp).sqrt(),
            balance: (psi_s + psi_rp) / (psi_s * psi_rp).sqrt(),
            cdf_grid: Vec::new(),
            du: 0.0,
        }
    }

    pub fn input(&self) -> &AsymptoticBerInput {
        &self.input
    }

    /// Exact density. The `x*K1` product is evaluated through its stable
    /// form so the `K1` blowup at the origin cancels against the `x` factor;
    /// the origin value is the same `2*(1+lambda)*(1/psi_s + 1/psi_r')` the
    /// exponential approximation starts from.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 || !x.is_finite() {
            return Err(Error::Domain(format!("pdf needs x >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(self.rate);
        }
        let z = self.bessel_scale * x;
        let damp = (-self.rate * x).exp();
        if damp == 0.0 {
            return Ok(0.0);
        }
        // z*K1(z) -> 1 as z -> 0, taming the K1 blowup against the x factor
        let (k0, z_k1) = if z < 1e-10 {
            (bessel_k0(z)?, 1.0)
        } else {
            let (k0, k1) = bessel_k0_k1(z)?;
            (k0, z * k1)
        };
        Ok(self.prefactor * damp * (self.balance * z_k1 / self.bessel_scale + 2.0 * x * k0))
    }

    /// First-order exponential approximation of the density.
    pub fn approx_pdf(&self, x: f64) -> f64 {
        self.rate * (-self.rate * x).exp()
    }

    /// First-order approximation of the CDF, `1 - exp(-rate*x)`.
    pub fn approx_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }

    fn build_cdf_cache(&mut self) -> Result<()> {
        // decay is exp(-(rate + bessel_scale)*x) up to a slowly varying
        // factor; span far enough that the remaining tail is negligible,
        // and always past the reach of the exp(-x) weight in the BER
        // integral
        let total_rate = self.rate + self.bessel_scale;
        let x_max = (40.0 / total_rate).max(90.0);
        let panels = 8192usize;
        let u_max = x_max.sqrt();
        let du = u_max / panels as f64;
        let mut grid = Vec::with_capacity(panels + 1);
        let mut acc = 0.0;
        grid.push(0.0);
        for k in 0..panels {
            let a = k as f64 * du;
            let mid = a + 0.5 * du;
            let half = 0.5 * du;
            let mut panel = 0.0;
            // integrate 2u*pdf(u^2) over the panel
            for i in 0..2 {
                for sign in [-1.0, 1.0] {
                    let u = mid + sign * half * GL4_NODES[i];
                    panel += GL4_WEIGHTS[i] * 2.0 * u * self.pdf(u * u)?;
                }
            }
            acc += panel * half;
            grid.push(acc);
        }
        self.cdf_grid = grid;
        self.du = du;
        Ok(())
    }

    /// CDF from the cache, linear interpolation on the square-root grid.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        assert!(
            !self.cdf_grid.is_empty(),
            "CDF queried on a distribution built without its cache"
        );
        let u = x.sqrt();
        let pos = u / self.du;
        let idx = pos as usize;
        if idx + 1 >= self.cdf_grid.len() {
            return *self.cdf_grid.last().expect("cache is non-empty");
        }
        let frac = pos - idx as f64;
        (self.cdf_grid[idx] * (1.0 - frac) + self.cdf_grid[idx + 1] * frac).min(1.0)
    }
}

/// The BER integral `(1/(2*sqrt(pi))) int_0^inf exp(-x) F(x) x^(-1/2) dx`
/// for an arbitrary SNR CDF, i.e. `E[Q(sqrt(2X))]`.
///
/// The substitution `x = u^2` removes the endpoint singularity. Relative
/// tolerance 1e-4 or better.
pub fn ber_from_cdf<F>(cdf: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let g = |u: f64| (-u * u).exp() * cdf(u * u);
    // beyond u = 8.5 the weight is exp(-72): gone even against BERs of 1e-12
    let rough = adaptive_simpson(&g, 0.0, 8.5, 1e-12)?;
    if !rough.is_finite() || rough < 0.0 {
        return Err(Error::Numeric(format!(
            "BER quadrature produced {rough}; CDF is not a valid distribution"
        )));
    }
    let eps = (rough * 1e-5).max(1e-280);
    let refined = adaptive_simpson(&g, 0.0, 8.5, eps)?;
    Ok(refined / std::f64::consts::PI.sqrt())
}

/// Numeric BER at an operating point: the integral above with the CDF
/// obtained by quadrature of the exact density. This is the reference the
/// closed-form high-SNR expression is judged against.
pub fn ber_numeric(input: &AsymptoticBerInput) -> Result<f64> {
    let dist = SnrDistribution::new(*input)?;
    ber_from_cdf(|x| dist.cdf(x))
}

/// Power split minimizing the high-SNR BER under `2*p_s + p_r = p`:
/// `p_s = p/4`, `p_r = p/2` (so the relay spends as much as both sources
/// together).
pub fn optimal_power(p: f64) -> Result<(f64, f64)> {
    if p <= 0.0 || !p.is_finite() {
        return Err(Error::Domain(format!("total power must be positive, got {p}")));
    }
    Ok((0.25 * p, 0.5 * p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channel, substream};
    use crate::receiver::instantaneous_snrs;

    #[test]
    fn asymptotic_spot_value() {
        let input = AsymptoticBerInput::new(1.0, 100.0).unwrap();
        assert!((input.psi_r_prime() - 200.0).abs() < 1e-12);
        assert!((asymptotic_ber(&input) - 0.015).abs() < 1e-15);
    }

    #[test]
    fn asymptotic_under_constraint_matches_closed_form() {
        // with 2 p_s + p_r = p the BER collapses to N0 (2l+1)^2 / (2 p l)
        let p = 3.0;
        let n0 = 0.004;
        for lambda in [0.125, 0.25, 0.5, 1.0, 2.0, 4.0] {
            let input = AsymptoticBerInput::from_constraint(lambda, p, n0).unwrap();
            let expected = n0 * (2.0 * lambda + 1.0).powi(2) / (2.0 * p * lambda);
            let got = asymptotic_ber(&input);
            assert!(
                ((got - expected) / expected).abs() < 1e-12,
                "lambda {lambda}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn asymptotic_decreasing_in_snr_and_convex_in_lambda() {
        let mut prev = f64::INFINITY;
        for snr_db in [5.0, 10.0, 15.0, 20.0, 30.0] {
            let psi = 10f64.powf(snr_db / 10.0);
            let ber = asymptotic_ber(&AsymptoticBerInput::new(1.0, psi).unwrap());
            assert!(ber < prev);
            prev = ber;
        }
        // under the constraint the curve dips at exactly lambda = 1/2
        let ber_at = |l: f64| {
            asymptotic_ber(&AsymptoticBerInput::from_constraint(l, 3.0, 0.01).unwrap())
        };
        assert!(ber_at(0.5) < ber_at(0.25));
        assert!(ber_at(0.5) < ber_at(1.0));
    }

    #[test]
    fn equal_to_optimal_ratio_is_1_76_db() {
        // equal power is lambda = 1 with psi_r' = 2 psi_s; optimal is
        // lambda = 1/2 with psi_r' = 3 psi_s; on the psi_s axis the BERs are
        //  1.5/psi_s and 1/psi_s
        let psi = 500.0;
        let equal = asymptotic_ber(&AsymptoticBerInput::new(1.0, psi).unwrap());
        let optimal = asymptotic_ber(&AsymptoticBerInput::new(0.5, psi).unwrap());
        let ratio = equal / optimal;
        assert!((ratio - 1.5).abs() < 1e-12);
        assert!((10.0 * ratio.log10() - 1.76).abs() < 0.01);
    }

    #[test]
    fn pdf_normalizes_to_one() {
        let input = AsymptoticBerInput::new(1.0, 100.0).unwrap();
        let dist = SnrDistribution::new(input).unwrap();
        // integrate over [0, 50/rate] with the sqrt substitution; the span
        // is far beyond 50x the mean
        let upper = (50.0 / dist.rate).sqrt();
        let g = |u: f64| 2.0 * u * dist.pdf(u * u).unwrap();
        let total = adaptive_simpson(&g, 0.0, upper, 1e-9).unwrap();
        assert!((total - 1.0).abs() < 1e-3, "pdf integrates to {total}");
    }

    #[test]
    fn pdf_origin_limit_matches_exponential_form() {
        let input = AsymptoticBerInput::new(0.5, 31.6).unwrap();
        let dist = SnrDistribution::params_only(input);
        let at_zero = dist.pdf(0.0).unwrap();
        assert!((at_zero - dist.rate).abs() < 1e-12);
        // continuity: approaching zero reproduces the limit
        let near = dist.pdf(1e-9).unwrap();
        assert!((near - at_zero).abs() / at_zero < 1e-3, "{near} vs {at_zero}");
        assert!((dist.approx_pdf(0.0) - at_zero).abs() < 1e-12);
    }

    #[test]
    fn pdf_rejects_negative_argument() {
        let input = AsymptoticBerInput::new(1.0, 10.0).unwrap();
        assert!(gamma_d_pdf(-0.5, &input).is_err());
    }

    #[test]
    fn cdf_cache_is_monotone_and_saturates() {
        let input = AsymptoticBerInput::new(2.0, 50.0).unwrap();
        let dist = SnrDistribution::new(input).unwrap();
        let mut prev = -1.0;
        for k in 0..200 {
            let x = k as f64 * 0.5;
            let f = dist.cdf(x);
            assert!(f >= prev && (0.0..=1.0).contains(&f));
            prev = f;
        }
        assert!(dist.cdf(1e9) > 0.999);
    }

    #[test]
    fn histogram_of_simulated_snr_matches_pdf() {
        // gamma_d drawn through the instantaneous-SNR formula at 30 dB vs
        // the quadrature CDF: 20 equal-width bins over the central 90% mass,
        // each within 5% relative
        let psi_s: f64 = 1000.0;
        let pw = PowerProfile::equal(3.0).unwrap();
        let noise = NoiseModel::new(pw.p_s() / psi_s).unwrap();
        let input = AsymptoticBerInput::from_power(&pw, &noise);
        let dist = SnrDistribution::new(input).unwrap();

        // invert the CDF on the cache for the 5% and 95% quantiles
        let quantile = |q: f64| {
            let mut lo = 0.0;
            let mut hi = 40.0 / dist.rate;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if dist.cdf(mid) < q {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let q05 = quantile(0.05);
        let q95 = quantile(0.95);
        let bins = 20usize;
        let width = (q95 - q05) / bins as f64;

        let samples = 1_000_000u64;
        let mut counts = vec![0u64; bins];
        for k in 0..samples {
            let mut rng = substream(90, 0, 0, k);
            let ch = draw_channel(&mut rng);
            let g = instantaneous_snrs(&ch, &pw, &noise).gamma_d;
            if g >= q05 && g < q95 {
                let b = ((g - q05) / width) as usize;
                counts[b.min(bins - 1)] += 1;
            }
        }
        for (b, &count) in counts.iter().enumerate() {
            let lo = q05 + b as f64 * width;
            let hi = lo + width;
            let expected = (dist.cdf(hi) - dist.cdf(lo)) * samples as f64;
            let rel = (count as f64 - expected).abs() / expected;
            assert!(
                rel < 0.05,
                "bin {b} [{lo:.3}, {hi:.3}): count {count} vs expected {expected:.1} (rel {rel:.4})"
            );
        }
    }

    #[test]
    fn ber_integral_reproduces_rayleigh_closed_form() {
        // X exponential with mean g: E[Q(sqrt(2X))] = (1 - sqrt(g/(1+g)))/2
        for mean in [1.0, 10.0, 100.0, 10_000.0] {
            let cdf = |x: f64| -(-x / mean).exp_m1();
            let got = ber_from_cdf(cdf).unwrap();
            let expected = 0.5 * (1.0 - (mean / (1.0 + mean)).sqrt());
            let rel = (got - expected).abs() / expected;
            assert!(rel < 1e-4, "mean {mean}: {got} vs {expected} (rel {rel:e})");
        }
    }

    #[test]
    fn eq21_identity_against_monte_carlo() {
        // E[Q(sqrt(2X))] by simulation equals the CDF-integral route
        let mean = 4.0;
        let mut rng = substream(91, 0, 0, 0);
        let n = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let u: f64 = rand::Rng::random(&mut rng);
            let x = -mean * (1.0 - u).ln();
            acc += gaussian_q((2.0 * x).sqrt());
        }
        let mc = acc / n as f64;
        let integral = ber_from_cdf(|x: f64| -(-x / mean).exp_m1()).unwrap();
        assert!((mc - integral).abs() < 1e-3, "MC {mc} vs integral {integral}");
    }

    #[test]
    fn numeric_ber_approaches_asymptote_from_above() {
        for snr_db in [30.0, 35.0, 40.0] {
            let psi = 10f64.powf(snr_db / 10.0);
            let input = AsymptoticBerInput::new(1.0, psi).unwrap();
            let numeric = ber_numeric(&input).unwrap();
            let asym = asymptotic_ber(&input);
            let ratio = numeric / asym;
            assert!(
                (1.0..1.5).contains(&ratio),
                "psi_s {snr_db} dB: numeric/asym = {ratio}"
            );
        }
        // and the gap shrinks with SNR
        let r30 = ber_numeric(&AsymptoticBerInput::new(1.0, 1e3).unwrap()).unwrap()
            / asymptotic_ber(&AsymptoticBerInput::new(1.0, 1e3).unwrap());
        let r40 = ber_numeric(&AsymptoticBerInput::new(1.0, 1e4).unwrap()).unwrap()
            / asymptotic_ber(&AsymptoticBerInput::new(1.0, 1e4).unwrap());
        assert!(r40 < r30, "{r40} !< {r30}");
    }

    #[test]
    fn first_order_cdf_reproduces_asymptote() {
        // both steps of the expansion land on the closed form at high SNR:
        // the exponential CDF approximation and its linear first-order form
        let input = AsymptoticBerInput::new(1.0, 10_000.0).unwrap();
        let dist = SnrDistribution::params_only(input);
        let closed = asymptotic_ber(&input);

        let via_exponential = ber_from_cdf(|x| dist.approx_cdf(x)).unwrap();
        assert!(
            ((via_exponential - closed) / closed).abs() < 1e-3,
            "{via_exponential} vs {closed}"
        );

        let linear = |x: f64| (dist.rate * x).min(1.0);
        let via_linear = ber_from_cdf(linear).unwrap();
        assert!(
            ((via_linear - closed) / closed).abs() < 1e-3,
            "{via_linear} vs {closed}"
        );
    }

    #[test]
    fn approx_cdf_matches_its_density() {
        let input = AsymptoticBerInput::new(0.5, 200.0).unwrap();
        let dist = SnrDistribution::params_only(input);
        for x in [0.0, 0.5, 3.0, 20.0] {
            let expected = 1.0 - (-dist.rate * x).exp();
            assert!((dist.approx_cdf(x) - expected).abs() < 1e-12);
        }
        // first-order agreement with the exact density at the origin
        assert!((dist.approx_pdf(0.0) - dist.pdf(0.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn optimal_power_closed_form_and_grid_search() {
        let (p_s, p_r) = optimal_power(3.0).unwrap();
        assert!((p_s - 0.75).abs() < 1e-15);
        assert!((p_r - 1.5).abs() < 1e-15);
        assert!((2.0 * p_s + p_r - 3.0).abs() < 1e-15);
        // the relay carries as much power as both sources together
        assert!((p_r - 2.0 * p_s).abs() < 1e-15);
        assert!(optimal_power(0.0).is_err());

        // brute-force oracle over the constraint
        let mut best = (f64::INFINITY, 0.0);
        let n = 200;
        for k in 0..n {
            let lambda = 0.05 * (20.0f64 / 0.05).powf(k as f64 / (n - 1) as f64);
            let ber =
                asymptotic_ber(&AsymptoticBerInput::from_constraint(lambda, 3.0, 0.01).unwrap());
            if ber < best.0 {
                best = (ber, lambda);
            }
        }
        // grid resolution is ~3% multiplicative
        assert!(
            (best.1 - 0.5).abs() < 0.5 * 0.035,
            "grid argmin at {}",
            best.1
        );
    }
}
