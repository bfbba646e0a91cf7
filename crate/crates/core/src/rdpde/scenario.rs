use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::certify::certificate::{Certificate, Condition, Verdict, Witness};
use crate::certify::sampling::{worst_over_samples, Sampling};
use crate::error::{Error, Result};
use crate::linalg::{matrix_measure, symmetric_eigen, DenseMatrix, NormKind, Weight};
use crate::rdpde::grid::{neumann_lambda2, neumann_lambda2_exact, Field, Grid1D};
use crate::scalar::Scalar;
use crate::system::{RateFunction, SampleBox};

pub type ReactionFn<T> = Arc<dyn Fn(&[T], &mut [T]) + Send + Sync>;
pub type ReactionJacobianFn<T> = Arc<dyn Fn(&[T]) -> DenseMatrix<T> + Send + Sync>;

/// Pointwise reaction term `f: ℝⁿ → ℝⁿ` with its Jacobian.
#[derive(Clone)]
pub struct Reaction<T> {
    dim: usize,
    f: ReactionFn<T>,
    jacobian: ReactionJacobianFn<T>,
    linear: Option<DenseMatrix<T>>,
}

impl<T: Scalar> Reaction<T> {
    /// `f` writes `f(u)` into its second argument.
    pub fn new(
        dim: usize,
        f: impl Fn(&[T], &mut [T]) + Send + Sync + 'static,
        jacobian: impl Fn(&[T]) -> DenseMatrix<T> + Send + Sync + 'static,
    ) -> Self {
        Self { dim, f: Arc::new(f), jacobian: Arc::new(jacobian), linear: None }
    }

    /// `f(u) = A u`.
    pub fn linear(a: DenseMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("reaction matrix has shape {:?}", a.shape())));
        }
        let n = a.rows();
        let (fa, ja) = (a.clone(), a.clone());
        Ok(Self {
            dim: n,
            f: Arc::new(move |u, out| {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = fa.row(i).iter().zip(u).map(|(&x, &y)| x * y).sum();
                }
            }),
            jacobian: Arc::new(move |_| ja.clone()),
            linear: Some(a),
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self::linear(DenseMatrix::zeros(dim, dim)).expect("square")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, u: &[T], out: &mut [T]) {
        (self.f)(u, out)
    }

    pub fn eval(&self, u: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        (self.f)(u, &mut out);
        out
    }

    pub fn jacobian(&self, u: &[T]) -> Result<DenseMatrix<T>> {
        let j = (self.jacobian)(u);
        if j.shape() != (self.dim, self.dim) || !j.is_finite() {
            return Err(Error::Evaluation {
                t: 0.0,
                x: u.iter().map(|v| v.to_f64_lossy()).collect(),
                reason: "reaction Jacobian has wrong shape or non-finite entries".into(),
            });
        }
        Ok(j)
    }

    pub fn as_linear(&self) -> Option<&DenseMatrix<T>> {
        self.linear.as_ref()
    }
}

impl<T: fmt::Debug> fmt::Debug for Reaction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reaction").field("dim", &self.dim).field("linear", &self.linear).finish_non_exhaustive()
    }
}

/// A reaction-diffusion system `∂u/∂t = f(u) + Γ ∂²u/∂x²` on `[0, L]` with
/// zero-flux boundaries, together with the weight `P` and two initial
/// conditions.
#[derive(Debug, Clone)]
pub struct RdScenario<T> {
    grid: Grid1D<T>,
    gamma: DenseMatrix<T>,
    weight: Weight<T>,
    reaction: Reaction<T>,
    u0: Field<T>,
    v0: Field<T>,
    value_box: SampleBox<T>,
    pgamma_min_eig: T,
}

impl<T: Scalar> RdScenario<T> {
    pub fn new(
        grid: Grid1D<T>,
        gamma: DenseMatrix<T>,
        p: DenseMatrix<T>,
        reaction: Reaction<T>,
        u0: Field<T>,
        v0: Field<T>,
        value_box: SampleBox<T>,
    ) -> Result<Self> {
        let n = reaction.dim();
        if gamma.shape() != (n, n) {
            return Err(Error::Dimension(format!("Gamma has shape {:?} for {n} species", gamma.shape())));
        }
        if !gamma.is_finite() {
            return Err(Error::NonFinite("Gamma".into()));
        }
        let weight = Weight::new(p)?;
        if weight.dim() != n {
            return Err(Error::Dimension(format!("P has size {} for {n} species", weight.dim())));
        }
        for (name, f) in [("u0", &u0), ("v0", &v0)] {
            if f.n_species() != n || f.grid() != &grid {
                return Err(Error::Dimension(format!("{name} does not match the grid and species count")));
            }
        }
        if value_box.dim() != n {
            return Err(Error::Dimension(format!("value box has dimension {} for {n} species", value_box.dim())));
        }
        let pgamma = weight.matrix().try_mul(&gamma)?.symmetric_part();
        let pgamma_min_eig = symmetric_eigen(&pgamma)?.values[0];
        Ok(Self { grid, gamma, weight, reaction, u0, v0, value_box, pgamma_min_eig })
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn gamma(&self) -> &DenseMatrix<T> {
        &self.gamma
    }

    pub fn weight(&self) -> &Weight<T> {
        &self.weight
    }

    pub fn reaction(&self) -> &Reaction<T> {
        &self.reaction
    }

    pub fn n_species(&self) -> usize {
        self.reaction.dim()
    }

    pub fn u0(&self) -> &Field<T> {
        &self.u0
    }

    pub fn v0(&self) -> &Field<T> {
        &self.v0
    }

    pub fn value_box(&self) -> &SampleBox<T> {
        &self.value_box
    }

    /// Smallest eigenvalue of `sym(PΓ)`.
    pub fn pgamma_min_eigenvalue(&self) -> T {
        self.pgamma_min_eig
    }

    /// Whether `sym(PΓ) ⪰ 0` holds up to `1e-9`.
    pub fn pgamma_is_psd(&self) -> bool {
        self.pgamma_min_eig >= -T::tolerance(PSD_TOL)
    }

    /// The same system with other initial conditions, possibly on another
    /// grid.
    pub fn with_fields(&self, u0: Field<T>, v0: Field<T>) -> Result<Self> {
        Self::new(
            u0.grid().clone(),
            self.gamma.clone(),
            self.weight.matrix().clone(),
            self.reaction.clone(),
            u0,
            v0,
            self.value_box.clone(),
        )
    }
}

const PSD_TOL: f64 = 1e-9;

/// Result of [`check_rd_hypotheses`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RdCertificate<T> {
    pub certificate: Certificate<T>,
    /// `c = −max_u μ₂(P(Df(u) − λ₂Γ))` when positive.
    pub c: Option<T>,
    /// `c / λ_max(P)`.
    pub decay_rate: Option<T>,
    pub lambda2: T,
    pub lambda2_discrete: T,
}

/// Checks `sym(PΓ) ⪰ 0` and samples `μ₂(P(Df(u) − λ₂Γ))` over the value
/// box, with `λ₂ = (π/L)²`.
pub fn check_rd_hypotheses<T: Scalar>(scenario: &RdScenario<T>, sampling: &Sampling<T>) -> Result<RdCertificate<T>> {
    sampling.validate()?;
    let lambda2 = neumann_lambda2_exact(scenario.grid().length());
    let lambda2_discrete = neumann_lambda2(scenario.grid());
    let p = scenario.weight().matrix();
    let p_lmax = scenario.weight().lambda_max();

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("lambda2".to_string(), lambda2.to_f64_lossy());
    diagnostics.insert("lambda2_discrete".to_string(), lambda2_discrete.to_f64_lossy());
    diagnostics.insert("p_lambda_max".to_string(), p_lmax.to_f64_lossy());
    diagnostics.insert("sym_p_gamma_min_eigenvalue".to_string(), scenario.pgamma_min_eigenvalue().to_f64_lossy());
    let psd_note = "diffusion hypothesis checked as sym(P*Gamma) positive semidefinite \
                    (smallest eigenvalue >= -1e-9), which is stronger than mu_2(P*Gamma) >= 0; \
                    lambda_2 = (pi/L)^2 from the continuum Neumann spectrum";

    if !scenario.pgamma_is_psd() {
        let offending = scenario.pgamma_min_eigenvalue();
        return Ok(RdCertificate {
            certificate: Certificate {
                condition: Condition::RdHypotheses,
                rate: None,
                samples: 0,
                seed: sampling.seed,
                worst_margin: -offending,
                witness: None,
                verdict: Verdict::Falsified,
                diagnostics,
                note: Some(format!("sym(P*Gamma) has eigenvalue {offending} < 0; {psd_note}")),
            },
            c: None,
            decay_rate: None,
            lambda2,
            lambda2_discrete,
        });
    }

    let shifted_gamma = scenario.gamma().scale(lambda2);
    let vbox = scenario.value_box();
    let worst = worst_over_samples(
        sampling,
        |rng| Ok(Witness { t: T::zero(), x: vbox.sample(rng), y: None }),
        |w| {
            let df = scenario.reaction().jacobian(&w.x)?;
            let m = p.try_mul(&df.try_sub(&shifted_gamma)?)?;
            Ok((matrix_measure(&m, &NormKind::Two)?, None))
        },
    )?;
    let certified = worst.margin < T::zero();
    let c = certified.then(|| -worst.margin);
    let decay_rate = c.map(|c| c / p_lmax);
    diagnostics.insert("worst_sample_index".to_string(), worst.index as f64);
    if let (Some(c), Some(r)) = (c, decay_rate) {
        diagnostics.insert("c".to_string(), c.to_f64_lossy());
        diagnostics.insert("decay_rate".to_string(), r.to_f64_lossy());
    }
    Ok(RdCertificate {
        certificate: Certificate {
            condition: Condition::RdHypotheses,
            rate: c.map(RateFunction::Constant),
            samples: sampling.samples,
            seed: sampling.seed,
            worst_margin: worst.margin,
            witness: Some(worst.witness),
            verdict: if certified { Verdict::Certified } else { Verdict::Falsified },
            diagnostics,
            note: Some(psd_note.to_string()),
        },
        c,
        decay_rate,
        lambda2,
        lambda2_discrete,
    })
}

/// `α(x) = −0.25 + 0.9·x·sin(15x)`.
pub fn figure1_alpha<T: Scalar>(x: T) -> T {
    T::of(-0.25) + T::of(0.9) * x * (T::of(15.0) * x).sin()
}

/// `β(x) = 1.75x − 0.75`.
pub fn figure1_beta<T: Scalar>(x: T) -> T {
    T::of(1.75) * x - T::of(0.75)
}

pub const FIGURE1_N_POINTS: usize = 201;
pub const FIGURE1_T_END: f64 = 0.8;

/// Two linearly coupled species on `[0, 1]`: `Γ = diag(1, 2)`,
/// `f(u) = 0.05·[[1/2, 1/3], [1/3, 1/4]]·u`, `P = I`,
/// `u0 = (10α, 10β)`, `v0 = (5β, 2.5α)`.
pub fn figure1_scenario<T: Scalar>(n_points: usize) -> Result<RdScenario<T>> {
    let grid = Grid1D::new(T::one(), n_points)?;
    let gamma = DenseMatrix::from_diagonal(&[T::one(), T::of(2.0)]);
    let b = DenseMatrix::from_rows(&[[T::of(0.5), T::one() / T::of(3.0)], [T::one() / T::of(3.0), T::of(0.25)]])?;
    let reaction = Reaction::linear(b.scale(T::of(0.05)))?;
    let ten = T::of(10.0);
    let u0 = Field::from_fn(&grid, 2, |x| vec![ten * figure1_alpha(x), ten * figure1_beta(x)])?;
    let v0 = Field::from_fn(&grid, 2, |x| vec![T::of(5.0) * figure1_beta(x), T::of(2.5) * figure1_alpha(x)])?;
    RdScenario::new(grid, gamma, DenseMatrix::identity(2), reaction, u0, v0, SampleBox::cube(2, T::of(20.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn figure1_data() {
        assert_eq!(figure1_alpha(0.0f64), -0.25);
        assert_eq!(figure1_beta(0.0f64), -0.75);
        assert_eq!(figure1_beta(1.0f64), 1.0);
        let s = figure1_scenario::<f64>(FIGURE1_N_POINTS).unwrap();
        assert_eq!(s.u0().at(0)[0], -2.5);
        let r = s.reaction().eval(&[1.0, 0.0]);
        assert!((r[0] - 0.025).abs() < 1e-16 && (r[1] - 0.05 / 3.0).abs() < 1e-16);
        assert!(s.pgamma_is_psd());
    }

    #[test]
    fn figure1_hypotheses() {
        let s = figure1_scenario::<f64>(FIGURE1_N_POINTS).unwrap();
        let cert = check_rd_hypotheses(&s, &Sampling::new(100, 1)).unwrap();
        assert!(cert.certificate.is_certified());
        // Oracle: closed-form largest eigenvalue of the symmetric 2×2 matrix.
        let (a, b, d) = (0.025 - PI * PI, 1.0 / 60.0, 0.0125 - 2.0 * PI * PI);
        let lmax = 0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * b).sqrt();
        assert!((cert.c.unwrap() + lmax).abs() <= 1e-10);
        assert_eq!(cert.decay_rate, cert.c);
        assert!((cert.lambda2 - PI * PI).abs() <= 1e-14);
        assert!((cert.lambda2_discrete - PI * PI).abs() <= 1e-3);
    }

    fn scalar_scenario(gamma: f64, reaction: Reaction<f64>) -> RdScenario<f64> {
        let g = Grid1D::new(1.0, 21).unwrap();
        let u = Field::from_fn(&g, 1, |x| vec![x]).unwrap();
        RdScenario::new(
            g,
            DenseMatrix::from_rows(&[[gamma]]).unwrap(),
            DenseMatrix::identity(1),
            reaction,
            u.clone(),
            u,
            SampleBox::cube(1, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn pure_diffusion_certifies_lambda2() {
        let s = scalar_scenario(1.0, Reaction::zero(1));
        let cert = check_rd_hypotheses(&s, &Sampling::new(10, 0)).unwrap();
        assert!((cert.c.unwrap() - PI * PI).abs() <= 1e-12);
    }

    #[test]
    fn growth_without_diffusion_is_falsified() {
        let s = scalar_scenario(0.0, Reaction::linear(DenseMatrix::identity(1)).unwrap());
        let cert = check_rd_hypotheses(&s, &Sampling::new(10, 0)).unwrap();
        assert_eq!(cert.certificate.verdict, Verdict::Falsified);
        assert_eq!(cert.certificate.worst_margin, 1.0);
        assert!(cert.c.is_none());
    }

    #[test]
    fn indefinite_diffusion_is_falsified_with_eigenvalue() {
        let g = Grid1D::new(1.0, 5).unwrap();
        let u = Field::from_fn(&g, 2, |x| vec![x, -x]).unwrap();
        // μ₂(PΓ) = 0 here, but sym(PΓ) has eigenvalue −1.
        let gamma = DenseMatrix::from_rows(&[[0.0, 0.0], [0.0, -1.0]]).unwrap();
        let p = DenseMatrix::identity(2);
        let s = RdScenario::new(g, gamma, p, Reaction::zero(2), u.clone(), u, SampleBox::cube(2, 1.0)).unwrap();
        assert!(!s.pgamma_is_psd());
        let cert = check_rd_hypotheses(&s, &Sampling::new(10, 0)).unwrap();
        assert_eq!(cert.certificate.verdict, Verdict::Falsified);
        assert_eq!(cert.certificate.worst_margin, 1.0);
        assert!(cert.certificate.note.unwrap().contains("-1"));
    }
}
