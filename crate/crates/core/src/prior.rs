//! Isotropic priors f(b) over the Bloch ball and their radial/angular
//! moment integrals.
//!
//! A prior is a nonnegative radial measure normalized so that
//! 4π ∫ db b² f(b) = 1. Point masses are first-class (the key reference
//! priors are deltas at b = 0 and b = 1); an optional smooth part is either
//! the uniform-ball density or a linearly interpolated table. Smooth radial
//! integrals run through the substitution b = sin ψ, which turns every
//! integrand of the form poly(b)·(1−b²)^{k/2} into a trigonometric
//! polynomial, so Gauss–Legendre converges spectrally even for the
//! half-integer exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

/// Tolerance on total prior mass after load.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Quadrature order used once at load time to normalize tabulated densities.
const LOAD_NORMALIZATION_ORDER: usize = 256;

/// A point mass `mass` at Bloch radius `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMass {
    #[serde(rename = "b")]
    pub radius: f64,
    pub mass: f64,
}

/// Smooth radial density kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothKind {
    /// f(b) = 3/(4π), uniform over the unit ball.
    UniformBall,
    /// Linear interpolation of samples (b_i, f_i) on [0, 1].
    Table { b: Vec<f64>, f: Vec<f64> },
}

/// The smooth part of a prior, carrying the mass assigned to it and the
/// renormalization factor applied at load time.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothDensity {
    pub kind: SmoothKind,
    /// Total mass 4π ∫ db b² f(b) carried by the smooth part.
    pub mass: f64,
    /// Factor by which the raw table (or unit-ball density) was scaled.
    pub scale: f64,
}

impl SmoothDensity {
    /// Density value f(b), including the renormalization factor.
    pub fn value(&self, b: f64) -> f64 {
        match &self.kind {
            SmoothKind::UniformBall => self.scale * 3.0 / (4.0 * std::f64::consts::PI),
            SmoothKind::Table { b: xs, f: fs } => {
                if b <= xs[0] {
                    return self.scale * fs[0];
                }
                if b >= xs[xs.len() - 1] {
                    return self.scale * fs[fs.len() - 1];
                }
                let i = xs.partition_point(|&x| x <= b).min(xs.len() - 1);
                let (x0, x1) = (xs[i - 1], xs[i]);
                let (f0, f1) = (fs[i - 1], fs[i]);
                let t = if x1 > x0 { (b - x0) / (x1 - x0) } else { 0.0 };
                self.scale * (f0 + t * (f1 - f0))
            }
        }
    }
}

/// An isotropic prior over the Bloch ball: point masses plus an optional
/// smooth radial density, with total mass 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPrior {
    id: String,
    points: Vec<PointMass>,
    smooth: Option<SmoothDensity>,
}

/// A moment I_α = 4π ∫ db b² f(b) ((1−b²)/4)^α, with α carried as 2α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentValue {
    pub twice_alpha: u32,
    pub value: f64,
}

/// On-disk prior document: optional point masses and optional smooth density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriorDocument {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointMass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityDocument>,
}

/// On-disk density description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityDocument {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<f64>>,
}

impl RadialPrior {
    /// Point mass at b = 1: the unknown state is pure.
    pub fn pure() -> Self {
        Self {
            id: "pure".into(),
            points: vec![PointMass {
                radius: 1.0,
                mass: 1.0,
            }],
            smooth: None,
        }
    }

    /// Point mass at b = 0: the unknown state is completely random.
    pub fn random_state() -> Self {
        Self {
            id: "random".into(),
            points: vec![PointMass {
                radius: 0.0,
                mass: 1.0,
            }],
            smooth: None,
        }
    }

    /// Uniform density over the unit Bloch ball.
    pub fn uniform_ball() -> Self {
        Self {
            id: "uniform-ball".into(),
            points: Vec::new(),
            smooth: Some(SmoothDensity {
                kind: SmoothKind::UniformBall,
                mass: 1.0,
                scale: 1.0,
            }),
        }
    }

    /// Two point masses; masses must add to 1.
    pub fn two_point(mass0: f64, radius0: f64, mass1: f64, radius1: f64) -> Result<Self> {
        Self::from_parts(
            format!("two-point:{mass0}@{radius0},{mass1}@{radius1}"),
            vec![
                PointMass {
                    radius: radius0,
                    mass: mass0,
                },
                PointMass {
                    radius: radius1,
                    mass: mass1,
                },
            ],
            None,
        )
    }

    /// Validates radii, masses, and total normalization.
    ///
    /// When a density document is present its raw integral is rescaled to the
    /// mass left over by the point part (user tables rarely normalize
    /// exactly); the applied factor is recorded in [`SmoothDensity::scale`].
    pub fn from_parts(
        id: String,
        points: Vec<PointMass>,
        density: Option<DensityDocument>,
    ) -> Result<Self> {
        for p in &points {
            if !(0.0..=1.0).contains(&p.radius) {
                return Err(Error::RadiusOutOfRange { radius: p.radius });
            }
            if p.mass < 0.0 || !p.mass.is_finite() {
                return Err(Error::PriorSchema(format!(
                    "point mass {} must be nonnegative",
                    p.mass
                )));
            }
        }
        let point_mass: f64 = points.iter().map(|p| p.mass).sum();
        let remainder = 1.0 - point_mass;

        let smooth = match density {
            None => {
                if remainder.abs() > MASS_TOLERANCE {
                    return Err(Error::PriorNormalization { total: point_mass });
                }
                None
            }
            Some(doc) => {
                if remainder < -MASS_TOLERANCE {
                    return Err(Error::PriorNormalization {
                        total: point_mass + 1.0,
                    });
                }
                let remainder = remainder.max(0.0);
                let kind = match doc.kind.as_str() {
                    "uniform-ball" => SmoothKind::UniformBall,
                    "table" => {
                        let b = doc.b.ok_or_else(|| {
                            Error::PriorSchema("table density needs a \"b\" grid".into())
                        })?;
                        let f = doc.f.ok_or_else(|| {
                            Error::PriorSchema("table density needs \"f\" samples".into())
                        })?;
                        if b.len() != f.len() || b.len() < 2 {
                            return Err(Error::PriorSchema(
                                "table grids need equal length >= 2".into(),
                            ));
                        }
                        if b.windows(2).any(|w| w[1] <= w[0]) {
                            return Err(Error::PriorSchema(
                                "table grid must be strictly increasing".into(),
                            ));
                        }
                        for &x in &b {
                            if !(0.0..=1.0).contains(&x) {
                                return Err(Error::RadiusOutOfRange { radius: x });
                            }
                        }
                        if f.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                            return Err(Error::PriorSchema(
                                "table density values must be nonnegative".into(),
                            ));
                        }
                        SmoothKind::Table { b, f }
                    }
                    other => {
                        return Err(Error::PriorSchema(format!(
                            "unknown density kind \"{other}\""
                        )))
                    }
                };
                let unscaled = SmoothDensity {
                    kind,
                    mass: remainder,
                    scale: 1.0,
                };
                let raw = smooth_integral(&unscaled, LOAD_NORMALIZATION_ORDER, |_| 1.0);
                if raw <= 0.0 {
                    if remainder > MASS_TOLERANCE {
                        return Err(Error::PriorNormalization { total: point_mass });
                    }
                    None
                } else {
                    Some(SmoothDensity {
                        scale: remainder / raw,
                        ..unscaled
                    })
                }
            }
        };

        let prior = Self { id, points, smooth };
        let total = prior.total_mass(LOAD_NORMALIZATION_ORDER);
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::PriorNormalization { total });
        }
        Ok(prior)
    }

    /// Loads and validates a prior from its JSON document.
    pub fn load(document: &PriorDocument) -> Result<Self> {
        Self::from_parts("custom".into(), document.points.clone(), document.density.clone())
    }

    /// Parses a prior from JSON text.
    pub fn load_json(json: &str) -> Result<Self> {
        let doc: PriorDocument =
            serde_json::from_str(json).map_err(|e| Error::PriorSchema(e.to_string()))?;
        Self::load(&doc)
    }

    /// The document form of this prior (smooth table values unscaled back).
    pub fn document(&self) -> PriorDocument {
        PriorDocument {
            points: self.points.clone(),
            density: self.smooth.as_ref().map(|s| match &s.kind {
                SmoothKind::UniformBall => DensityDocument {
                    kind: "uniform-ball".into(),
                    b: None,
                    f: None,
                },
                SmoothKind::Table { b, f } => DensityDocument {
                    kind: "table".into(),
                    b: Some(b.clone()),
                    f: Some(f.clone()),
                },
            }),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn points(&self) -> &[PointMass] {
        &self.points
    }

    pub fn smooth(&self) -> Option<&SmoothDensity> {
        self.smooth.as_ref()
    }

    /// Σ w_k h(b_k) + 4π ∫ db b² f_smooth(b) h(b): the prior average of a
    /// radial observable.
    pub fn radial_average(&self, order: usize, mut h: impl FnMut(f64) -> f64) -> f64 {
        self.radial_average_n(order, |b| [h(b)])[0]
    }

    /// Prior average of K radial observables sharing one evaluation pass;
    /// worth it when h is expensive (a matrix trace per radius).
    pub fn radial_average_n<const K: usize>(
        &self,
        order: usize,
        mut h: impl FnMut(f64) -> [f64; K],
    ) -> [f64; K] {
        let mut acc = vec![0.0; K];
        self.radial_average_dyn(order, |b, out| out.copy_from_slice(&h(b)), &mut acc);
        let mut fixed = [0.0; K];
        fixed.copy_from_slice(&acc);
        fixed
    }

    /// Prior average of a dynamically sized vector of radial observables:
    /// `h(b, out)` fills `out` with the observables at radius b, and `acc`
    /// receives their prior-weighted sums.
    pub fn radial_average_dyn(
        &self,
        order: usize,
        mut h: impl FnMut(f64, &mut [f64]),
        acc: &mut [f64],
    ) {
        let mut scratch = vec![0.0; acc.len()];
        for p in &self.points {
            h(p.radius, &mut scratch);
            for (a, x) in acc.iter_mut().zip(&scratch) {
                *a += p.mass * x;
            }
        }
        if let Some(smooth) = &self.smooth {
            smooth_integral_dyn(smooth, order, &mut h, acc, &mut scratch);
        }
    }

    /// Total mass; 1 for every valid prior.
    pub fn total_mass(&self, order: usize) -> f64 {
        self.radial_average(order, |_| 1.0)
    }

    pub fn has_smooth_part(&self) -> bool {
        self.smooth.is_some()
    }
}

/// 4π ∫ db b² f(b) h(b) over the smooth part via b = sin ψ.
fn smooth_integral(smooth: &SmoothDensity, order: usize, mut h: impl FnMut(f64) -> f64) -> f64 {
    let mut acc = [0.0];
    smooth_integral_dyn(
        smooth,
        order,
        &mut |b, out: &mut [f64]| out[0] = h(b),
        &mut acc,
        &mut [0.0],
    );
    acc[0]
}

/// Vector form of [`smooth_integral`]. Tabulated densities are only
/// piecewise smooth, so the ψ range is split at the table knots and each
/// piece integrated separately; otherwise one rule covers the whole range.
fn smooth_integral_dyn(
    smooth: &SmoothDensity,
    order: usize,
    h: &mut impl FnMut(f64, &mut [f64]),
    acc: &mut [f64],
    scratch: &mut [f64],
) {
    let rule = GaussLegendre::new(order);
    let four_pi = 4.0 * std::f64::consts::PI;
    let mut segment = |lo: f64, hi: f64, acc: &mut [f64], scratch: &mut [f64]| {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
            let psi = mid + half * t;
            let (s, c) = psi.sin_cos();
            let jac = half * w * four_pi * s * s * c * smooth.value(s);
            h(s, scratch);
            for (a, x) in acc.iter_mut().zip(scratch.iter()) {
                *a += jac * x;
            }
        }
    };
    match &smooth.kind {
        SmoothKind::UniformBall => segment(0.0, std::f64::consts::FRAC_PI_2, acc, scratch),
        SmoothKind::Table { b, .. } => {
            let mut breaks: Vec<f64> = Vec::with_capacity(b.len() + 2);
            breaks.push(0.0);
            breaks.extend(b.iter().map(|&x| x.clamp(0.0, 1.0).asin()));
            breaks.push(std::f64::consts::FRAC_PI_2);
            breaks.sort_by(f64::total_cmp);
            for w in breaks.windows(2).filter(|w| w[1] > w[0] + 1e-15) {
                segment(w[0], w[1], acc, scratch);
            }
        }
    }
}

/// ((1−b²)/4)^(2α/2) with exact handling of the α = 0 and b = 1 edges.
pub fn moment_weight(b: f64, twice_alpha: u32) -> f64 {
    if twice_alpha == 0 {
        return 1.0;
    }
    let x = ((1.0 - b * b) / 4.0).max(0.0);
    match twice_alpha {
        1 => x.sqrt(),
        2 => x,
        _ => x.powf(twice_alpha as f64 / 2.0),
    }
}

/// Moment I_α = 4π ∫ db b² f(b) ((1−b²)/4)^α at α = twice_alpha/2.
pub fn moment_i(prior: &RadialPrior, twice_alpha: u32, order: usize) -> f64 {
    prior.radial_average(order, |b| moment_weight(b, twice_alpha))
}

/// The moment sequence I_0, I_{1/2}, …, up to α = max_twice_alpha/2.
pub fn moment_values(prior: &RadialPrior, max_twice_alpha: u32, order: usize) -> Vec<MomentValue> {
    (0..=max_twice_alpha)
        .map(|twice_alpha| MomentValue {
            twice_alpha,
            value: moment_i(prior, twice_alpha, order),
        })
        .collect()
}

/// The g₁, g₂ integrals of the sector (N, s):
///
///   g₁ = ⟨((1−b²)/4)^{(N+1)/2−s} · ((1+b·u)/2)^{2s}⟩,
///   g₂ = ⟨((1−b²)/4)^{N/2−s}    · ((1+b·u)/2)^{2s} · (b·u)/2⟩,
///
/// where ⟨·⟩ averages over the prior and the polar angle u = cos θ (the
/// azimuthal integral is trivial by isotropy). The angular factor is a
/// polynomial in u, so the Gauss–Legendre rule used here is exact in u and
/// point-mass priors evaluate without quadrature error.
pub fn g_integrals(
    prior: &RadialPrior,
    n_copies: u32,
    twice_s: u32,
    order: usize,
) -> Result<(f64, f64)> {
    if twice_s % 2 != n_copies % 2 || twice_s > n_copies {
        return Err(Error::ParityMismatch { n_copies, twice_s });
    }
    // exponents of (1−b²)/4, doubled: (N+1)/2−s → N+1−2s, N/2−s → N−2s
    let g1_twice_exp = n_copies + 1 - twice_s;
    let g2_twice_exp = n_copies - twice_s;
    let angular = GaussLegendre::new((twice_s as usize + 4).max(8));

    let g1 = prior.radial_average(order, |b| {
        moment_weight(b, g1_twice_exp)
            * 0.5
            * angular.integrate(|u| ((1.0 + b * u) / 2.0).powi(twice_s as i32))
    });
    let g2 = prior.radial_average(order, |b| {
        moment_weight(b, g2_twice_exp)
            * 0.5
            * angular.integrate(|u| ((1.0 + b * u) / 2.0).powi(twice_s as i32) * b * u / 2.0)
    });
    Ok((g1, g2))
}

/// Parses the CLI prior grammar: a builtin name (`pure`, `random`,
/// `uniform-ball`), the shorthand `two-point:m1@b1,m2@b2`, or inline JSON.
pub fn parse_prior_spec(spec: &str) -> Result<RadialPrior> {
    match spec {
        "pure" => return Ok(RadialPrior::pure()),
        "random" => return Ok(RadialPrior::random_state()),
        "uniform-ball" => return Ok(RadialPrior::uniform_ball()),
        _ => {}
    }
    if let Some(rest) = spec.strip_prefix("two-point:") {
        let mut parts = Vec::new();
        for chunk in rest.split(',') {
            let (m, b) = chunk.split_once('@').ok_or_else(|| {
                Error::PriorSchema(format!("expected mass@radius, got \"{chunk}\""))
            })?;
            let mass: f64 = m
                .parse()
                .map_err(|_| Error::PriorSchema(format!("bad mass \"{m}\"")))?;
            let radius: f64 = b
                .parse()
                .map_err(|_| Error::PriorSchema(format!("bad radius \"{b}\"")))?;
            parts.push(PointMass { radius, mass });
        }
        if parts.len() != 2 {
            return Err(Error::PriorSchema(
                "two-point shorthand needs exactly two mass@radius entries".into(),
            ));
        }
        return RadialPrior::from_parts(format!("two-point:{rest}"), parts, None);
    }
    if spec.trim_start().starts_with('{') {
        return RadialPrior::load_json(spec);
    }
    let text = std::fs::read_to_string(spec)?;
    Ok(RadialPrior::load_json(&text)?.with_id(spec.to_string()))
}

/// The reference two-point prior: mass 1/10 at b = 0, 9/10 at b = 1, the
/// conjectured minimizer of the single-copy fidelity.
pub fn reference_two_point() -> RadialPrior {
    RadialPrior::two_point(0.1, 0.0, 0.9, 1.0)
        .expect("normalized")
        .with_id("two-point")
}

/// Draws a random valid prior: one to four point masses, optionally mixed
/// with a smooth part. Used by the randomized invariant suites.
pub fn random_prior(rng: &mut impl rand::Rng) -> RadialPrior {
    let n_points = rng.gen_range(1..=4usize);
    let mut masses: Vec<f64> = (0..n_points).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let with_smooth = rng.gen_bool(0.4);
    let smooth_fraction = if with_smooth {
        rng.gen_range(0.1..0.9)
    } else {
        0.0
    };
    let total: f64 = masses.iter().sum();
    for m in &mut masses {
        *m *= (1.0 - smooth_fraction) / total;
    }
    let points: Vec<PointMass> = masses
        .into_iter()
        .map(|mass| PointMass {
            radius: rng.gen::<f64>(),
            mass,
        })
        .collect();
    let density = with_smooth.then(|| {
        if rng.gen_bool(0.5) {
            DensityDocument {
                kind: "uniform-ball".into(),
                b: None,
                f: None,
            }
        } else {
            let grid: Vec<f64> = vec![0.0, 0.25, 0.5, 0.75, 1.0];
            let vals: Vec<f64> = (0..5).map(|_| rng.gen::<f64>() + 0.05).collect();
            DensityDocument {
                kind: "table".into(),
                b: Some(grid),
                f: Some(vals),
            }
        }
    });
    RadialPrior::from_parts("random-mixture".into(), points, density).expect("constructed valid")
}
