//! Moment and correlation estimators for bosonic ensembles.
//!
//! Positive-P averages are normally ordered directly. Truncated-Wigner
//! averages are symmetrically ordered and are converted here:
//! `⟨a†a⟩ = ⟨|ψ|²⟩ − ½`, `⟨a†²a²⟩ = ⟨|ψ|⁴⟩ − 2⟨|ψ|²⟩ + ½`.

use crate::ensemble::{Ensemble, ObservableEstimate, PhasePoint, C64};
use crate::error::{Error, Result};

/// Which phase-space representation an ensemble samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    PositiveP,
    Wigner,
}

fn check_mode(ens: &Ensemble<PhasePoint>, j: usize) -> Result<()> {
    let m = ens.modes();
    if j >= m {
        return Err(Error::Index { index: j, len: m });
    }
    Ok(())
}

/// `⟨â_j⟩` (identical in both orderings).
pub fn mean_amplitude(
    ens: &Ensemble<PhasePoint>,
    j: usize,
    n_sub: usize,
) -> Result<ObservableEstimate> {
    check_mode(ens, j)?;
    ens.weighted_mean(|p| p.alpha()[j], n_sub)
}

/// Normally ordered occupation `⟨â†_j â_j⟩`.
pub fn number(
    ens: &Ensemble<PhasePoint>,
    j: usize,
    repr: Representation,
    n_sub: usize,
) -> Result<ObservableEstimate> {
    check_mode(ens, j)?;
    let mut est = ens.weighted_mean(|p| p.number(j), n_sub)?;
    if repr == Representation::Wigner {
        est.mean -= 0.5;
    }
    Ok(est)
}

/// `⟨â_j²⟩`.
pub fn mean_amplitude_squared(
    ens: &Ensemble<PhasePoint>,
    j: usize,
    n_sub: usize,
) -> Result<ObservableEstimate> {
    check_mode(ens, j)?;
    ens.weighted_mean(|p| p.alpha()[j] * p.alpha()[j], n_sub)
}

/// Variance of the quadrature `X_θ = â e^{−iθ} + â† e^{iθ}` of mode `j`
/// (vacuum level 1).
pub fn quadrature_variance(
    ens: &Ensemble<PhasePoint>,
    j: usize,
    theta: f64,
    repr: Representation,
    n_sub: usize,
) -> Result<ObservableEstimate> {
    check_mode(ens, j)?;
    let ph = C64::from_polar(1.0, -theta);
    let x = move |p: &PhasePoint| p.alpha()[j] * ph + p.beta()[j] * ph.conj();
    // Normal order: X² = a²e^{−2iθ} + a†²e^{2iθ} + 2a†a + 1; symmetric: X² as is.
    let offset = match repr {
        Representation::PositiveP => 1.0,
        Representation::Wigner => 0.0,
    };
    let x2 = move |p: &PhasePoint| {
        let (a, b) = (p.alpha()[j] * ph, p.beta()[j] * ph.conj());
        a * a + b * b + 2.0 * b * a
    };
    ens.weighted_functional(&[&x, &x2], |m| m[1] + offset - m[0] * m[0], n_sub)
}

/// Normalized second-order correlation `g⁽²⁾(k1, k2)`.
///
/// For `k1 ≠ k2`: `⟨a†₁a†₂a₂a₁⟩ / (⟨a†₁a₁⟩⟨a†₂a₂⟩)`; for `k1 = k2`:
/// `⟨a†²a²⟩ / ⟨a†a⟩²`. Errors come from the sub-ensemble spread of the
/// ratio; the estimate is flagged unreliable when either occupation is
/// consistent with zero at 3σ.
pub fn estimate_g2(
    ens: &Ensemble<PhasePoint>,
    k1: usize,
    k2: usize,
    repr: Representation,
    n_sub: usize,
) -> Result<ObservableEstimate> {
    estimate_g2_binned(ens, &[(k1, k2)], repr, n_sub)
}

/// `g⁽²⁾` of a bin of mode pairs: `Σ ⟨a†_a a†_b a_b a_a⟩ / Σ ⟨n_a⟩⟨n_b⟩`.
pub fn estimate_g2_binned(
    ens: &Ensemble<PhasePoint>,
    pairs: &[(usize, usize)],
    repr: Representation,
    n_sub: usize,
) -> Result<ObservableEstimate> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("empty g2 bin".into()));
    }
    let mut modes: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    modes.sort_unstable();
    modes.dedup();
    for &k in &modes {
        check_mode(ens, k)?;
    }
    let wigner = repr == Representation::Wigner;

    let mut obs: Vec<Box<dyn Fn(&PhasePoint) -> C64 + Sync>> = Vec::new();
    for &k in &modes {
        obs.push(Box::new(move |p: &PhasePoint| p.number(k)));
    }
    let pairs_owned: Vec<(usize, usize)> = pairs.to_vec();
    obs.push(Box::new(move |p: &PhasePoint| {
        pairs_owned
            .iter()
            .map(|&(a, b)| {
                if a == b {
                    let n = p.number(a);
                    if wigner {
                        n * n - 2.0 * n + 0.5
                    } else {
                        p.beta()[a] * p.beta()[a] * p.alpha()[a] * p.alpha()[a]
                    }
                } else if wigner {
                    (p.number(a) - 0.5) * (p.number(b) - 0.5)
                } else {
                    p.number(a) * p.number(b)
                }
            })
            .sum()
    }));
    let refs: Vec<&(dyn Fn(&PhasePoint) -> C64 + Sync)> = obs.iter().map(|b| b.as_ref()).collect();
    let shift = if wigner { 0.5 } else { 0.0 };
    let slot = |k: usize| modes.binary_search(&k).expect("mode listed");
    let combine = |m: &[C64]| {
        let num = m[modes.len()];
        let den: C64 = pairs
            .iter()
            .map(|&(a, b)| (m[slot(a)] - shift) * (m[slot(b)] - shift))
            .sum();
        num / den
    };
    let mut est = ens.weighted_functional(&refs, combine, n_sub)?;
    // Reliability: every occupation must be resolved from zero.
    for &k in &modes {
        let n = number(ens, k, repr, n_sub)?;
        if n.mean.re.abs() <= 3.0 * n.std_error_re || n.mean.re == 0.0 {
            est.reliable = false;
        }
    }
    if !est.mean.is_finite() {
        est.reliable = false;
    }
    Ok(est)
}

/// First-order coherence `⟨a†_i a_j⟩ / √(⟨n_i⟩⟨n_j⟩)` (positive-P).
pub fn estimate_g1(
    ens: &Ensemble<PhasePoint>,
    i: usize,
    j: usize,
    n_sub: usize,
) -> Result<ObservableEstimate> {
    check_mode(ens, i)?;
    check_mode(ens, j)?;
    let cross = move |p: &PhasePoint| p.beta()[i] * p.alpha()[j];
    let ni = move |p: &PhasePoint| p.number(i);
    let nj = move |p: &PhasePoint| p.number(j);
    ens.weighted_functional(&[&cross, &ni, &nj], |m| m[0] / (m[1] * m[2]).sqrt(), n_sub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn coherent_g2_is_one() {
        let alpha = [C64::new(1.5, 0.2), C64::new(-0.3, 0.8), C64::new(2.0, -1.0)];
        let e = Ensemble::replicate(PhasePoint::coherent(&alpha), 30, 2).unwrap();
        for k1 in 0..3 {
            for k2 in 0..3 {
                let g = estimate_g2(&e, k1, k2, Representation::PositiveP, 10).unwrap();
                assert!((g.mean - C64::new(1.0, 0.0)).norm() < 1e-12);
            }
        }
        assert!(estimate_g2(&e, 0, 3, Representation::PositiveP, 10).is_err());
    }

    #[test]
    fn thermal_mode_bunches() {
        // Glauber P of a thermal state: complex Gaussian α with ⟨|α|²⟩ = n̄.
        let nbar = 3.0;
        let e = Ensemble::from_fn(40000, 12, |_, rng| {
            let x: f64 = StandardNormal.sample(rng);
            let y: f64 = StandardNormal.sample(rng);
            PhasePoint::coherent(&[C64::new(x, y) * (nbar / 2.0f64).sqrt()])
        })
        .unwrap();
        let g = estimate_g2(&e, 0, 0, Representation::PositiveP, 10).unwrap();
        assert!(g.agrees_re(2.0, 3.0), "{g:?}");
        assert!(g.reliable);
    }

    #[test]
    fn vacuum_g2_is_unreliable() {
        let e = Ensemble::replicate(PhasePoint::coherent(&[C64::new(0.0, 0.0)]), 20, 1).unwrap();
        let g = estimate_g2(&e, 0, 0, Representation::PositiveP, 10).unwrap();
        assert!(!g.reliable);
    }

    #[test]
    fn coherent_quadrature_variance_is_vacuum_level() {
        let e = Ensemble::replicate(PhasePoint::coherent(&[C64::new(3.0, 1.0)]), 20, 2).unwrap();
        for theta in [0.0, 0.7, std::f64::consts::FRAC_PI_2] {
            let v = quadrature_variance(&e, 0, theta, Representation::PositiveP, 10).unwrap();
            assert!((v.mean - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn g1_of_single_coherent_field_is_unimodular() {
        let e = Ensemble::replicate(
            PhasePoint::coherent(&[C64::new(1.0, 0.0), C64::new(0.0, 2.0)]),
            20,
            2,
        )
        .unwrap();
        let g = estimate_g1(&e, 0, 1, 10).unwrap();
        assert!((g.mean.norm() - 1.0).abs() < 1e-12);
    }
}
