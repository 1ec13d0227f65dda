//! Two-point-measurement work statistics of the cycle.
//!
//! The final state is the initial thermal state squeezed by |s|, so the
//! distribution of work W = 2kω is assembled from squeezed-number overlaps
//! S_{n,m} = |⟨m|S(s)|n⟩|². The overlap kernel is an alternating series whose
//! cancellation grows without bound in n, m; the evaluation below switches
//! from log-space f64 to exact fixed-point integers when the f64 sum loses
//! too many digits.

use crate::error::{Error, Result};
use crate::gaussian::ThermalSpec;
use crate::special::ln_factorial;
use num_bigint::BigInt;
use rayon::prelude::*;
use std::collections::BTreeMap;

const LN_4: f64 = 1.3862943611198906; // ln 4

/// Signed log-magnitude of the alternating kernel sum
/// Q = Σ_k (-1)^k x^k / (4^k k! (m-2k)! (k+δ)!), with x = sinh²|s|,
/// δ = (n-m)/2 and k running from max(0, -δ) to ⌊m/2⌋.
/// Only the magnitude matters downstream: the kernel enters squared.
struct KernelLog {
    ln_abs: f64,
}

/// Per-term natural logs (without sign) of the kernel series, built from the
/// O(1) term-to-term ratio instead of three log-gammas per term. The ratio
/// x(m-2k)(m-2k-1) / (4(k+1)(k+1+δ)) is monotone decreasing in k, so the
/// series is unimodal; `k_star` marks its peak.
struct KernelSeries {
    term_logs: Vec<f64>,
    ln_max: f64,
    /// absolute k index of the largest term
    k_star: usize,
}

fn kernel_series(x_ln: f64, m: usize, delta: i64, lo: usize, hi: usize) -> KernelSeries {
    let mut term_logs = Vec::with_capacity(hi - lo + 1);
    let mut lt = lo as f64 * (x_ln - LN_4)
        - ln_factorial(lo)
        - ln_factorial(m - 2 * lo)
        - ln_factorial((lo as i64 + delta) as usize);
    term_logs.push(lt);
    let mut ln_max = lt;
    let mut k_star = lo;
    for k in lo..hi {
        let num = x_ln + (((m - 2 * k) as f64) * ((m - 2 * k - 1) as f64)).ln();
        let den = LN_4 + (((k + 1) as f64) * ((k as i64 + 1 + delta) as f64)).ln();
        lt += num - den;
        term_logs.push(lt);
        if lt > ln_max {
            ln_max = lt;
            k_star = k + 1;
        }
    }
    KernelSeries {
        term_logs,
        ln_max,
        k_star,
    }
}

/// Relative size of the f64 alternating sum (in units of its largest term)
/// below which we do not trust it and fall back to exact arithmetic.
const CANCEL_GUARD: f64 = 1e-5;

/// Terms this far (in nats) below the peak cannot move the f64 sum.
const F64_WINDOW: f64 = 46.0;

fn kernel_f64(series: &KernelSeries, lo: usize) -> Option<KernelLog> {
    let ln_max = series.ln_max;
    // Kahan-compensated accumulation at the scale of the largest term.
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut counted = 0usize;
    for (i, &lt) in series.term_logs.iter().enumerate() {
        if lt < ln_max - F64_WINDOW {
            continue;
        }
        counted += 1;
        let sign = if (lo + i) % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * (lt - ln_max).exp();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let guard = CANCEL_GUARD * counted.max(1) as f64;
    if sum.abs() <= guard {
        return None;
    }
    Some(KernelLog {
        ln_abs: ln_max + sum.abs().ln(),
    })
}

/// ln of a positive big integer.
fn ln_big(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits <= 63 {
        let (_, digits) = v.to_u64_digits();
        return (digits.first().copied().unwrap_or(0) as f64).ln();
    }
    let shift = bits - 63;
    let top: BigInt = v >> shift;
    let (_, digits) = top.to_u64_digits();
    (digits[0] as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact-integer evaluation of the kernel sum, scaled so the largest term is
/// 2^bits. `x` enters through its exact dyadic decomposition, so the only
/// rounding is the 1-ulp truncation of each integer division.
fn kernel_bigint(
    x: f64,
    m: usize,
    delta: i64,
    lo: usize,
    hi: usize,
    series: &KernelSeries,
) -> KernelLog {
    let (mant, exp2) = {
        let bits = x.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        debug_assert!(raw_exp > 0, "subnormal sinh^2 not reachable here");
        ((1u64 << 52) | frac, raw_exp - 1075)
    };

    let k_star = series.k_star;
    let ln_max = series.ln_max;

    let mut bits_scale: u32 = 256;
    loop {
        // x · 2^bits as an exact integer (x ≥ sinh²(small) keeps the shift positive).
        let x_shift = bits_scale as i64 + exp2 + 52;
        let x_big: BigInt = if x_shift >= 52 {
            BigInt::from(mant) << (x_shift - 52) as u32
        } else {
            BigInt::from(mant) >> (52 - x_shift) as u32
        };
        let one_shift: BigInt = BigInt::from(1) << bits_scale;

        let mut terms: Vec<BigInt> = vec![BigInt::from(0); hi - lo + 1];
        terms[k_star - lo] = one_shift.clone();
        // March up from the reference term: t_{k+1}/t_k = -x a_k / (4 b_k).
        for k in k_star..hi {
            let a = BigInt::from(((m - 2 * k) as u128) * ((m - 2 * k - 1) as u128));
            let b = BigInt::from(((k + 1) as u128) * ((k as i64 + 1 + delta) as u128));
            let num = &terms[k - lo] * &x_big * a;
            let den = &one_shift * (4u32 * b);
            terms[k + 1 - lo] = -(num / den);
        }
        // March down: t_k/t_{k+1} = -4 b_k / (x a_k).
        for k in (lo..k_star).rev() {
            let a = BigInt::from(((m - 2 * k) as u128) * ((m - 2 * k - 1) as u128));
            let b = BigInt::from(((k + 1) as u128) * ((k as i64 + 1 + delta) as u128));
            let num = &terms[k + 1 - lo] * &one_shift * (4u32 * b);
            let den = &x_big * a;
            terms[k - lo] = -(num / den);
        }
        let sum: BigInt = terms.iter().sum();
        // Each truncation is ≤ 1 at unit scale; demand ~2^30 of headroom.
        let floor = BigInt::from((hi - lo + 1) as u64) << 30;
        let abs = BigInt::from(sum.magnitude().clone());
        if abs > floor {
            return KernelLog {
                ln_abs: ln_max + ln_big(&abs) - bits_scale as f64 * std::f64::consts::LN_2,
            };
        }
        bits_scale *= 2;
        assert!(
            bits_scale <= 1 << 16,
            "kernel sum vanished beyond fixed-point range (m = {m}, delta = {delta})"
        );
    }
}

/// Overlap S_{n,m}(|s|) = |⟨m|S(s)|n⟩|² of a squeezed number state with the
/// number basis. Depends on |s| only; zero when n and m differ in parity.
pub fn squeezed_number_overlap(n: usize, m: usize, s: f64) -> f64 {
    let s = s.abs();
    if s == 0.0 {
        return if n == m { 1.0 } else { 0.0 };
    }
    if (n + m) % 2 == 1 {
        return 0.0;
    }
    let sh = s.sinh();
    let x = sh * sh;
    let x_ln = 2.0 * sh.ln();
    let delta = (n as i64 - m as i64) / 2;
    let lo = (-delta).max(0) as usize;
    let hi = m / 2;
    if lo > hi {
        // Only possible for m = 0 < n with n even: overlap via the n-k swap.
        return squeezed_number_overlap(m, n, s);
    }
    let series = kernel_series(x_ln, m, delta, lo, hi);
    let kernel = match kernel_f64(&series, lo) {
        Some(k) => k,
        None => kernel_bigint(x, m, delta, lo, hi, &series),
    };
    let ln_tanh = x_ln - 2.0 * s.cosh().ln();
    let ln_s = ln_factorial(n) + ln_factorial(m) - (n as f64 - m as f64) * std::f64::consts::LN_2
        + 0.5 * (n as f64 - m as f64) * ln_tanh
        - (2.0 * m as f64 + 1.0) * s.cosh().ln()
        + 2.0 * kernel.ln_abs;
    ln_s.exp()
}

/// Distribution of two-point-measurement work over the support {2kω}.
#[derive(Clone, Debug)]
pub struct WorkDistribution {
    pub omega: f64,
    probs: BTreeMap<i64, f64>,
    /// Probability not captured by the truncations (upper bound).
    pub tail_mass: f64,
    pub beta_omega: f64,
    pub squeeze_amp: f64,
}

impl WorkDistribution {
    pub fn probability(&self, k: i64) -> f64 {
        self.probs.get(&k).copied().unwrap_or(0.0)
    }

    /// Work value of bin k, in energy units.
    pub fn work_at(&self, k: i64) -> f64 {
        2.0 * k as f64 * self.omega
    }

    pub fn support(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs.iter().map(|(&k, &p)| (k, p))
    }

    pub fn total_mass(&self) -> f64 {
        kahan_sum(self.probs.values().copied())
    }

    pub fn mean(&self) -> f64 {
        kahan_sum(self.probs.iter().map(|(&k, &p)| p * self.work_at(k)))
    }

    pub fn negative_work_probability(&self) -> f64 {
        kahan_sum(
            self.probs
                .iter()
                .filter(|(&k, _)| k < 0)
                .map(|(_, &p)| p),
        )
    }

    /// Largest deviation of P(-W)/P(W) from e^{-βW} over bins where both
    /// probabilities exceed `floor`.
    pub fn crooks_deviation(&self, floor: f64) -> f64 {
        if self.beta_omega.is_infinite() {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for (&k, &p) in self.probs.iter().filter(|(&k, _)| k > 0) {
            let p_neg = self.probability(-k);
            if p > floor && p_neg > floor {
                let expected = (-self.beta_omega * 2.0 * k as f64).exp();
                worst = worst.max((p_neg / p - expected).abs());
            }
        }
        worst
    }
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

const N_HARD_CAP: usize = 4000;
const M_DOUBLINGS: usize = 6;

/// Number of thermal levels needed so the discarded geometric weight is
/// below `eps`.
fn thermal_cutoff(th: &ThermalSpec, eps: f64) -> Result<usize> {
    if th.is_vacuum() {
        return Ok(0);
    }
    let n = th.occupation();
    let ln_ratio = (n / (1.0 + n)).ln();
    let n_max = (eps.ln() / ln_ratio).ceil() as usize;
    if n_max > N_HARD_CAP {
        return Err(Error::CutoffCapacity {
            cap: N_HARD_CAP,
            tail: eps,
        });
    }
    Ok(n_max)
}

/// Build the work distribution for a thermal input squeezed by |s|.
///
/// Two truncations are adapted independently: the measurement cutoff per row
/// (the squeeze spreads level n out to m ~ n e^{2|s|}, so each row gets its
/// own range) until at most `eps_tail` probability is unaccounted, and the
/// initial-level cutoff n_max until the discarded rows cannot disturb any
/// populated bin relative to its Crooks mirror. The second check matters
/// because S_{n,n-2k} grows like n^{2k}: a cutoff sized only for geometric
/// weights under-resolves far negative bins. Rows evaluate in parallel but
/// merge in a fixed order, so results are bitwise reproducible.
pub fn work_distribution(th: &ThermalSpec, s: f64, eps_tail: f64) -> Result<WorkDistribution> {
    if !(eps_tail > 0.0 && eps_tail <= 1e-6) {
        return Err(Error::InvalidParameter(format!(
            "eps_tail = {eps_tail} outside (0, 1e-6]"
        )));
    }
    let s = s.abs();
    let mut n_max = thermal_cutoff(th, eps_tail / 10.0)?;
    let spread = (2.0 * s).exp();
    let mut m_span = (10.0 * (1.0 + s.sinh().powi(2))).ceil() as usize + 20;
    let rho = th.occupation() / (1.0 + th.occupation());
    let mut m_doublings = 0usize;

    loop {
        let row_hi = |n: usize| -> usize {
            let base = (n as f64 * spread).ceil() as usize + m_span;
            base + (base + n) % 2 // keep hi on the parity of n
        };
        let rows: Vec<(usize, Vec<f64>)> = (0..=n_max)
            .into_par_iter()
            .map(|n| {
                let row: Vec<f64> = (n % 2..=row_hi(n))
                    .step_by(2)
                    .map(|m| squeezed_number_overlap(n, m, s))
                    .collect();
                (n, row)
            })
            .collect();

        let mut probs: BTreeMap<i64, f64> = BTreeMap::new();
        for (n, row) in &rows {
            let q_n = th.population(*n);
            for (j, &overlap) in row.iter().enumerate() {
                let m = n % 2 + 2 * j;
                let k = (m as i64 - *n as i64) / 2;
                *probs.entry(k).or_insert(0.0) += q_n * overlap;
            }
        }
        let wd = WorkDistribution {
            omega: 1.0,
            probs,
            tail_mass: 0.0,
            beta_omega: th.beta_omega(),
            squeeze_amp: s,
        };
        let tail = (1.0 - wd.total_mass()).max(0.0);
        if tail > eps_tail {
            m_doublings += 1;
            if m_doublings > M_DOUBLINGS {
                return Err(Error::CutoffCapacity {
                    cap: row_hi(n_max),
                    tail,
                });
            }
            m_span *= 2;
            continue;
        }

        // Crooks adequacy: bound the contribution of rows n > n_max to each
        // bin by the last row's contribution times a geometric-decay margin,
        // and demand it be negligible against the bin and its mirror.
        let adequate = th.is_vacuum() || {
            let (n_last, row) = rows.last().unwrap();
            let q_last = th.population(*n_last);
            let margin = 10.0 / (1.0 - rho);
            row.iter().enumerate().all(|(j, &overlap)| {
                let m = n_last % 2 + 2 * j;
                let k = (m as i64 - *n_last as i64) / 2;
                let p = wd.probability(k).max(wd.probability(-k));
                q_last * overlap * margin <= 1e-9 * p + 1e-16
            })
        };
        if adequate {
            return Ok(WorkDistribution {
                tail_mass: tail,
                ..wd
            });
        }
        if n_max >= N_HARD_CAP {
            return Err(Error::CutoffCapacity {
                cap: N_HARD_CAP,
                tail,
            });
        }
        n_max = (n_max + (n_max / 3).max(8)).min(N_HARD_CAP);
    }
}

/// Cumulants κ1..κ_order (order ≤ 4) of the work distribution, in powers of ω.
///
/// Errors out when the unaccounted tail could move the requested cumulant by
/// more than a conservative bound.
pub fn cumulants_from_distribution(wd: &WorkDistribution, order: usize) -> Result<Vec<f64>> {
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "cumulant order {order} outside 1..=4"
        )));
    }
    let w_edge = wd
        .support()
        .map(|(k, _)| wd.work_at(k).abs())
        .fold(0.0_f64, f64::max)
        + 2.0 * wd.omega;
    let bound = wd.tail_mass * (2.0 * w_edge).powi(order as i32);
    let mean = wd.mean();
    let central =
        |p: usize| kahan_sum(wd.support().map(|(k, pr)| pr * (wd.work_at(k) - mean).powi(p as i32)));
    let mut out = vec![mean];
    if order >= 2 {
        out.push(central(2));
    }
    if order >= 3 {
        out.push(central(3));
    }
    if order >= 4 {
        let mu2 = out[1];
        out.push(central(4) - 3.0 * mu2 * mu2);
    }
    let scale = 1.0 + out[order - 1].abs();
    if bound > 1e-4 * scale {
        return Err(Error::TailPrecision {
            order,
            tail: wd.tail_mass,
            bound,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const S_R1: f64 = 0.549306; // saturated |s| for the linear ramp

    #[test]
    fn overlap_closed_reductions() {
        // S_{0,0} = sech|s|, S_{0,2} = tanh²|s| sech|s| / 2
        let sech = 1.0 / S_R1.cosh();
        assert_relative_eq!(squeezed_number_overlap(0, 0, S_R1), sech, max_relative = 1e-12);
        assert_relative_eq!(
            squeezed_number_overlap(0, 2, S_R1),
            0.5 * S_R1.tanh().powi(2) * sech,
            max_relative = 1e-12
        );
        assert_eq!(squeezed_number_overlap(1, 2, 0.7), 0.0);
        assert_eq!(squeezed_number_overlap(3, 3, 0.0), 1.0);
        assert_eq!(squeezed_number_overlap(3, 5, 0.0), 0.0);
    }

    #[test]
    fn overlap_frozen_reference_values() {
        // Independently evaluated in 50-digit arithmetic.
        let cases = [
            (0usize, 0usize, 0.549306, 0.8660254662829132),
            (0, 2, 0.549306, 0.1082531364115032),
            (6, 10, 0.7, 0.009849064623391838),
            (7, 3, 1.1, 0.001746855812117648),
            (12, 12, 0.9, 0.0467655112039321),
            (40, 60, 1.2, 0.005760782537488636),
            (100, 100, 0.5493, 7.930918522552337e-8),
            (150, 200, 1.3, 0.0002413357505042778),
        ];
        for (n, m, s, expect) in cases {
            assert_relative_eq!(
                squeezed_number_overlap(n, m, s),
                expect,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn overlap_symmetry_and_rows() {
        for &(n, m) in &[(0usize, 4usize), (3, 9), (10, 40), (55, 91)] {
            for &s in &[0.3, 0.8814, 1.3] {
                assert_relative_eq!(
                    squeezed_number_overlap(n, m, s),
                    squeezed_number_overlap(m, n, s),
                    max_relative = 1e-9
                );
            }
        }
        // unitarity row sums
        for n in 0..=10 {
            let sum: f64 = (0..400).map(|m| squeezed_number_overlap(n, m, 0.9)).sum();
            assert_relative_eq!(sum, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn overlap_deep_cancellation_rows_still_normalize() {
        // Rows far past the reach of f64 alternating summation. The squeeze
        // spreads |n⟩ out to m ~ n e^{2|s|}, so the sum range scales with n.
        for &n in &[150usize, 342] {
            let m_cap = 14 * n + 1200;
            let sum: f64 = (0..m_cap)
                .map(|m| squeezed_number_overlap(n, m, 1.3169578969248167))
                .sum();
            assert_relative_eq!(sum, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn vacuum_distribution_matches_closed_form() {
        let th = ThermalSpec::vacuum();
        let wd = work_distribution(&th, S_R1, 1e-12).unwrap();
        assert_relative_eq!(wd.probability(0), 0.86603, epsilon = 1e-5);
        assert_relative_eq!(wd.probability(1), 0.10825, epsilon = 1e-5);
        assert_relative_eq!(wd.probability(2), 0.02030, epsilon = 1e-5);
        assert_eq!(wd.negative_work_probability(), 0.0);
        let pops = closed_forms::squeezed_vacuum_populations_from_s(S_R1, 40);
        for (n, &p) in pops.iter().enumerate() {
            assert_relative_eq!(wd.probability(n as i64), p, epsilon = 1e-12);
        }
    }

    #[test]
    fn thermal_distribution_mean_and_crooks() {
        for &n_beta in &[0.0, 1.0, 2.0] {
            let th = ThermalSpec::from_occupation(n_beta).unwrap();
            let wd = work_distribution(&th, S_R1, 1e-12).unwrap();
            let expected_mean = (2.0 * n_beta + 1.0) * S_R1.sinh().powi(2);
            assert_relative_eq!(wd.mean(), expected_mean, epsilon = 1e-8);
            assert!(wd.crooks_deviation(1e-10) < 1e-8);
        }
        // βω = ln 2: P(-2ω)/P(2ω) = 1/4 exactly
        let th = ThermalSpec::from_occupation(1.0).unwrap();
        let wd = work_distribution(&th, S_R1, 1e-12).unwrap();
        assert_relative_eq!(
            wd.probability(-1) / wd.probability(1),
            0.25,
            epsilon = 1e-8
        );
    }

    #[test]
    fn cumulants_vacuum_reference() {
        let th = ThermalSpec::vacuum();
        let wd = work_distribution(&th, S_R1, 1e-12).unwrap();
        let k = cumulants_from_distribution(&wd, 3).unwrap();
        let reference = closed_forms::vacuum_cumulants(S_R1, 1.0);
        assert_relative_eq!(k[0], reference.kappa1, epsilon = 1e-6);
        assert_relative_eq!(k[1], reference.kappa2, epsilon = 1e-6);
        assert_relative_eq!(k[2], reference.kappa3, epsilon = 1e-6);
        let skew = k[2] / k[1].powf(1.5);
        assert_relative_eq!(skew, 3.5355, epsilon = 1e-4);
    }

    #[test]
    fn cumulants_identity_squeeze() {
        let th = ThermalSpec::from_occupation(1.0).unwrap();
        let wd = work_distribution(&th, 0.0, 1e-12).unwrap();
        let k = cumulants_from_distribution(&wd, 3).unwrap();
        assert!(k.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn cumulant_thermal_mean() {
        let th = ThermalSpec::from_occupation(1.0).unwrap();
        let s = 0.881374;
        let wd = work_distribution(&th, s, 1e-12).unwrap();
        let k = cumulants_from_distribution(&wd, 1).unwrap();
        assert_relative_eq!(k[0], 3.0 * s.sinh().powi(2), epsilon = 1e-6);
        assert_relative_eq!(k[0], 3.0, epsilon = 1e-5); // sinh²(arcosh √2) = 1
    }

    #[test]
    fn eps_tail_validation() {
        let th = ThermalSpec::vacuum();
        assert!(work_distribution(&th, 0.5, 1e-5).is_err());
        assert!(work_distribution(&th, 0.5, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn distribution_invariants(n_beta in 0.0..4.0f64, s in 0.0..1.2f64) {
            let th = ThermalSpec::from_occupation(n_beta).unwrap();
            let wd = work_distribution(&th, s, 1e-10).unwrap();
            prop_assert!(wd.support().all(|(_, p)| p >= 0.0));
            let total = wd.total_mass() + wd.tail_mass;
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(wd.crooks_deviation(1e-9) < 1e-7);
            if n_beta == 0.0 {
                prop_assert!(wd.negative_work_probability() == 0.0);
            }
        }
    }
}
