//! Reference dynamical systems and trajectory generation: Lorenz 63 under a
//! fixed-step 4th-order Runge-Kutta integrator, the exact quasiperiodic
//! torus rotation, covariate/response maps, and delay-coordinate embeddings.

use ndarray::Array2;

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Which reference system a trajectory comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelId {
    Lorenz63,
    TorusRotation,
}

impl ModelId {
    pub fn state_dim(&self) -> usize {
        match self {
            ModelId::Lorenz63 => 3,
            ModelId::TorusRotation => 2,
        }
    }

    pub fn parameter_count(&self) -> usize {
        match self {
            ModelId::Lorenz63 => 3,
            ModelId::TorusRotation => 2,
        }
    }
}

/// Sampling plan for a reference trajectory.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub model: ModelId,
    /// Lorenz 63: (σ, ρ, β). Torus rotation: (ν₁, ν₂).
    pub parameters: Vec<f64>,
    /// Sampling interval Δt.
    pub dt: f64,
    /// Number of recorded samples N.
    pub n_samples: usize,
    /// Samples discarded before recording starts.
    pub spinup_steps: usize,
    pub initial_state: Vec<f64>,
    /// Internal integrator steps per recorded sample (Lorenz 63 only).
    pub integrator_substeps: usize,
}

impl SystemSpec {
    /// Classical chaotic Lorenz 63 setup: (10, 28, 8/3), Δt = 0.05, with a
    /// spinup long enough to land near the attractor.
    pub fn lorenz63_default() -> Self {
        SystemSpec {
            model: ModelId::Lorenz63,
            parameters: vec![10.0, 28.0, 8.0 / 3.0],
            dt: 0.05,
            n_samples: 2000,
            spinup_steps: 2000,
            initial_state: vec![1.0, 1.0, 1.0],
            integrator_substeps: 5,
        }
    }

    /// Torus rotation with rationally independent frequencies (1, √2).
    pub fn torus_default() -> Self {
        SystemSpec {
            model: ModelId::TorusRotation,
            parameters: vec![1.0, std::f64::consts::SQRT_2],
            dt: 0.05,
            n_samples: 2000,
            spinup_steps: 0,
            initial_state: vec![0.0, 0.0],
            integrator_substeps: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_samples < 2 {
            return Err(Error::Config(format!(
                "n_samples must be at least 2, got {}",
                self.n_samples
            )));
        }
        if self.parameters.len() != self.model.parameter_count() {
            return Err(Error::Config(format!(
                "{:?} takes {} parameters, got {}",
                self.model,
                self.model.parameter_count(),
                self.parameters.len()
            )));
        }
        if self.initial_state.len() != self.model.state_dim() {
            return Err(Error::Config(format!(
                "{:?} state has dimension {}, got initial state of length {}",
                self.model,
                self.model.state_dim(),
                self.initial_state.len()
            )));
        }
        if self.integrator_substeps == 0 {
            return Err(Error::Config("integrator_substeps must be at least 1".into()));
        }
        if self.parameters.iter().any(|p| !p.is_finite())
            || self.initial_state.iter().any(|x| !x.is_finite())
        {
            return Err(Error::Config("parameters and initial state must be finite".into()));
        }
        Ok(())
    }
}

/// Observation map X applied to raw states.
#[derive(Debug, Clone, PartialEq)]
pub enum CovariateMap {
    /// Full observations: covariates equal the state coordinates.
    Identity,
    /// Partial observations: a single state coordinate.
    CoordinateProjection(usize),
    /// Angles (ω₁, ω₂) mapped to (r₁cos ω₁, r₁sin ω₁, r₂cos ω₂, r₂sin ω₂).
    ///
    /// Euclidean distances in the image respect the torus topology, which a
    /// raw angle chart breaks at the 0/2π seam. Unequal radii split the
    /// eigenvalue degeneracy between the two angular directions.
    TorusChart { radii: [f64; 2] },
}

impl CovariateMap {
    pub fn torus_chart() -> Self {
        CovariateMap::TorusChart { radii: [1.0, 1.0] }
    }
}

/// A sampled trajectory: the empirical measure the data-driven operators act on.
#[derive(Debug, Clone)]
pub struct TrajectoryDataset {
    pub dt: f64,
    /// N×d raw states ω_n.
    pub states: Array2<f64>,
    /// N×m covariates x_n = X(ω_n).
    pub covariates: Array2<f64>,
    /// Length-N responses y_n = Y(ω_n) (first state coordinate).
    pub responses: Vec<f64>,
    pub covariate_map: CovariateMap,
}

impl TrajectoryDataset {
    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    /// Restrict to samples [start, end).
    pub fn slice(&self, start: usize, end: usize) -> TrajectoryDataset {
        TrajectoryDataset {
            dt: self.dt,
            states: self.states.slice(ndarray::s![start..end, ..]).to_owned(),
            covariates: self.covariates.slice(ndarray::s![start..end, ..]).to_owned(),
            responses: self.responses[start..end].to_vec(),
            covariate_map: self.covariate_map.clone(),
        }
    }
}

/// Delay-coordinate embedding: row r holds (x_n, x_{n−1}, …, x_{n−Q+1}) for
/// n = r + Q − 1, i.e. the Q most recent covariates in backward time order.
#[derive(Debug, Clone)]
pub struct DelayEmbedding {
    pub q: usize,
    /// (N−Q+1) × (mQ)
    pub rows: Array2<f64>,
    /// Index offset between embedding rows and dataset samples (= Q−1).
    pub base_index_offset: usize,
}

impl DelayEmbedding {
    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn width(&self) -> usize {
        self.rows.ncols()
    }
}

fn lorenz63_rhs(p: &[f64], s: [f64; 3]) -> [f64; 3] {
    let (sigma, rho, beta) = (p[0], p[1], p[2]);
    let [x, y, z] = s;
    [sigma * (y - x), x * (rho - z) - y, x * y - beta * z]
}

fn rk4_step(p: &[f64], s: [f64; 3], h: f64) -> [f64; 3] {
    let k1 = lorenz63_rhs(p, s);
    let k2 = lorenz63_rhs(p, add(s, scale(k1, 0.5 * h)));
    let k3 = lorenz63_rhs(p, add(s, scale(k2, 0.5 * h)));
    let k4 = lorenz63_rhs(p, add(s, scale(k3, h)));
    let mut out = s;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: [f64; 3], c: f64) -> [f64; 3] {
    [a[0] * c, a[1] * c, a[2] * c]
}

/// Advance the torus rotation by the exact flow, reducing angles mod 2π
/// into [0, 2π).
pub fn exact_torus_flow(omega0: [f64; 2], nu: [f64; 2], t: f64) -> [f64; 2] {
    let wrap = |x: f64| {
        let r = x.rem_euclid(TWO_PI);
        // rem_euclid can return the modulus itself after rounding
        if r >= TWO_PI {
            0.0
        } else {
            r
        }
    };
    [wrap(omega0[0] + nu[0] * t), wrap(omega0[1] + nu[1] * t)]
}

/// Generate a trajectory and observe it through the given covariate map.
/// The response is the first state coordinate.
pub fn simulate(spec: &SystemSpec, map: &CovariateMap) -> Result<TrajectoryDataset> {
    spec.validate()?;
    let n = spec.n_samples;
    let d = spec.model.state_dim();
    let mut states = Array2::<f64>::zeros((n, d));
    match spec.model {
        ModelId::Lorenz63 => {
            let h = spec.dt / spec.integrator_substeps as f64;
            let mut s = [
                spec.initial_state[0],
                spec.initial_state[1],
                spec.initial_state[2],
            ];
            let advance = |s: &mut [f64; 3], step_index: usize| -> Result<()> {
                for _ in 0..spec.integrator_substeps {
                    *s = rk4_step(&spec.parameters, *s, h);
                }
                if s.iter().any(|x| !x.is_finite()) {
                    return Err(Error::IntegrationDiverged { step: step_index });
                }
                Ok(())
            };
            for k in 0..spec.spinup_steps {
                advance(&mut s, k)?;
            }
            for i in 0..n {
                if i > 0 {
                    advance(&mut s, spec.spinup_steps + i)?;
                }
                states[[i, 0]] = s[0];
                states[[i, 1]] = s[1];
                states[[i, 2]] = s[2];
            }
        }
        ModelId::TorusRotation => {
            let nu = [spec.parameters[0], spec.parameters[1]];
            let omega0 = [spec.initial_state[0], spec.initial_state[1]];
            for i in 0..n {
                let t = (spec.spinup_steps + i) as f64 * spec.dt;
                let w = exact_torus_flow(omega0, nu, t);
                states[[i, 0]] = w[0];
                states[[i, 1]] = w[1];
            }
        }
    }
    let covariates = apply_covariate(&states, map)?;
    let responses = states.column(0).to_vec();
    Ok(TrajectoryDataset {
        dt: spec.dt,
        states,
        covariates,
        responses,
        covariate_map: map.clone(),
    })
}

/// Apply an observation map to an N×d state array.
pub fn apply_covariate(states: &Array2<f64>, map: &CovariateMap) -> Result<Array2<f64>> {
    let (n, d) = states.dim();
    match map {
        CovariateMap::Identity => Ok(states.clone()),
        CovariateMap::CoordinateProjection(i) => {
            if *i >= d {
                return Err(Error::Config(format!(
                    "projection index {} out of range for state dimension {}",
                    i, d
                )));
            }
            let mut out = Array2::<f64>::zeros((n, 1));
            for r in 0..n {
                out[[r, 0]] = states[[r, *i]];
            }
            Ok(out)
        }
        CovariateMap::TorusChart { radii } => {
            if d != 2 {
                return Err(Error::Config(format!(
                    "torus chart expects 2 angle coordinates, got {}",
                    d
                )));
            }
            if radii.iter().any(|r| !(*r > 0.0)) {
                return Err(Error::Config("torus chart radii must be positive".into()));
            }
            let mut out = Array2::<f64>::zeros((n, 4));
            for r in 0..n {
                let (w1, w2) = (states[[r, 0]], states[[r, 1]]);
                out[[r, 0]] = radii[0] * w1.cos();
                out[[r, 1]] = radii[0] * w1.sin();
                out[[r, 2]] = radii[1] * w2.cos();
                out[[r, 3]] = radii[1] * w2.sin();
            }
            Ok(out)
        }
    }
}

/// Build the Q-step delay embedding of a dataset's covariates.
pub fn delay_embed(dataset: &TrajectoryDataset, q: usize) -> Result<DelayEmbedding> {
    let n = dataset.len();
    let m = dataset.covariates.ncols();
    if q == 0 {
        return Err(Error::Config("delay count Q must be at least 1".into()));
    }
    if q > n {
        return Err(Error::Config(format!(
            "delay count Q = {} exceeds sample count N = {}",
            q, n
        )));
    }
    let rows_n = n - q + 1;
    let mut rows = Array2::<f64>::zeros((rows_n, m * q));
    for r in 0..rows_n {
        let base = r + q - 1;
        for lag in 0..q {
            for c in 0..m {
                rows[[r, lag * m + c]] = dataset.covariates[[base - lag, c]];
            }
        }
    }
    Ok(DelayEmbedding {
        q,
        rows,
        base_index_offset: q - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dataset_1d(values: &[f64]) -> TrajectoryDataset {
        let n = values.len();
        let mut states = Array2::<f64>::zeros((n, 1));
        for (i, v) in values.iter().enumerate() {
            states[[i, 0]] = *v;
        }
        TrajectoryDataset {
            dt: 1.0,
            states: states.clone(),
            covariates: states,
            responses: values.to_vec(),
            covariate_map: CovariateMap::Identity,
        }
    }

    #[test]
    fn lorenz_origin_is_fixed_point() {
        let spec = SystemSpec {
            initial_state: vec![0.0, 0.0, 0.0],
            n_samples: 50,
            spinup_steps: 10,
            ..SystemSpec::lorenz63_default()
        };
        let data = simulate(&spec, &CovariateMap::Identity).unwrap();
        for x in data.states.iter() {
            assert_eq!(*x, 0.0);
        }
    }

    #[test]
    fn torus_full_period_rotation() {
        let spec = SystemSpec {
            model: ModelId::TorusRotation,
            parameters: vec![1.0, 0.0],
            dt: TWO_PI,
            n_samples: 3,
            spinup_steps: 0,
            initial_state: vec![0.3, 0.9],
            integrator_substeps: 1,
        };
        let data = simulate(&spec, &CovariateMap::Identity).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(data.states[[i, 0]], 0.3, epsilon = 1e-10);
            assert_abs_diff_eq!(data.states[[i, 1]], 0.9, epsilon = 1e-10);
        }
    }

    #[test]
    fn lorenz_stays_in_absorbing_ball() {
        // Bound frozen from a 10^6-step reference integration (max observed
        // state norm 51.58) with margin.
        let spec = SystemSpec {
            n_samples: 2000,
            spinup_steps: 1000,
            ..SystemSpec::lorenz63_default()
        };
        let data = simulate(&spec, &CovariateMap::Identity).unwrap();
        let mut max_norm = 0.0f64;
        for row in data.states.rows() {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            max_norm = max_norm.max(norm);
        }
        assert!(max_norm < 60.0, "max norm {} outside absorbing ball", max_norm);
        assert!(max_norm > 10.0, "trajectory did not reach the attractor");
    }

    #[test]
    fn torus_flow_identity_and_wrap() {
        let w = exact_torus_flow([0.3, 0.9], [1.0, 2.0], 0.0);
        assert_eq!(w, [0.3, 0.9]);
        let w = exact_torus_flow([0.0, 0.0], [1.0, 2.0], std::f64::consts::PI);
        assert_abs_diff_eq!(w[0], std::f64::consts::PI, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        // endpoint error over 1 time unit vs. a fine reference; halving the
        // substep should shrink the error by about 2^4
        let base = SystemSpec {
            dt: 1.0,
            n_samples: 2,
            spinup_steps: 0,
            initial_state: vec![-3.1, 2.4, 21.0],
            integrator_substeps: 50,
            ..SystemSpec::lorenz63_default()
        };
        let endpoint = |substeps: usize| -> [f64; 3] {
            let spec = SystemSpec { integrator_substeps: substeps, ..base.clone() };
            let data = simulate(&spec, &CovariateMap::Identity).unwrap();
            [data.states[[1, 0]], data.states[[1, 1]], data.states[[1, 2]]]
        };
        let fine = endpoint(50 * 64);
        let coarse = endpoint(50);
        let half = endpoint(100);
        let err = |a: [f64; 3]| -> f64 {
            a.iter().zip(&fine).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        };
        let ratio = err(coarse) / err(half);
        assert!(
            (8.0..=32.0).contains(&ratio),
            "convergence ratio {} not ~16 (errors {} / {})",
            ratio,
            err(coarse),
            err(half)
        );
    }

    #[test]
    fn divergence_reports_step() {
        let spec = SystemSpec {
            model: ModelId::Lorenz63,
            // wildly unstable parameters with a big step blow up quickly
            parameters: vec![1e6, 1e8, 1.0],
            dt: 10.0,
            n_samples: 10,
            spinup_steps: 0,
            initial_state: vec![1.0, 1.0, 1.0],
            integrator_substeps: 1,
        };
        match simulate(&spec, &CovariateMap::Identity) {
            Err(Error::IntegrationDiverged { .. }) => {}
            other => panic!("expected divergence, got {:?}", other.map(|d| d.len())),
        }
    }

    #[test]
    fn projection_and_identity_maps() {
        let mut states = Array2::<f64>::zeros((2, 3));
        states[[0, 0]] = 1.0;
        states[[0, 1]] = 2.0;
        states[[0, 2]] = 3.0;
        states[[1, 0]] = 4.0;
        states[[1, 1]] = 5.0;
        states[[1, 2]] = 6.0;
        let id = apply_covariate(&states, &CovariateMap::Identity).unwrap();
        assert_eq!(id, states);
        let p0 = apply_covariate(&states, &CovariateMap::CoordinateProjection(0)).unwrap();
        assert_eq!(p0.dim(), (2, 1));
        assert_eq!(p0[[0, 0]], 1.0);
        assert_eq!(p0[[1, 0]], 4.0);
        assert!(apply_covariate(&states, &CovariateMap::CoordinateProjection(3)).is_err());
    }

    #[test]
    fn delay_embedding_shapes_and_order() {
        let data = dataset_1d(&[1.0, 2.0, 3.0, 4.0]);
        let e1 = delay_embed(&data, 1).unwrap();
        assert_eq!(e1.rows.dim(), (4, 1));
        assert_eq!(e1.base_index_offset, 0);
        for i in 0..4 {
            assert_eq!(e1.rows[[i, 0]], data.covariates[[i, 0]]);
        }
        let e2 = delay_embed(&data, 2).unwrap();
        assert_eq!(e2.rows.dim(), (3, 2));
        // backward time order: (x_n, x_{n-1})
        assert_eq!(e2.rows[[0, 0]], 2.0);
        assert_eq!(e2.rows[[0, 1]], 1.0);
        assert_eq!(e2.rows[[2, 0]], 4.0);
        assert_eq!(e2.rows[[2, 1]], 3.0);
        let e4 = delay_embed(&data, 4).unwrap();
        assert_eq!(e4.rows.dim(), (1, 4));
        assert_eq!(e4.rows.row(0).to_vec(), vec![4.0, 3.0, 2.0, 1.0]);
        assert!(delay_embed(&data, 5).is_err());
    }

    proptest! {
        #[test]
        fn torus_flow_stays_in_range(
            w0 in 0.0..TWO_PI, w1 in 0.0..TWO_PI,
            n0 in -4.0..4.0f64, n1 in -4.0..4.0f64,
            t in -100.0..100.0f64,
        ) {
            let w = exact_torus_flow([w0, w1], [n0, n1], t);
            prop_assert!((0.0..TWO_PI).contains(&w[0]));
            prop_assert!((0.0..TWO_PI).contains(&w[1]));
        }

        #[test]
        fn torus_flow_group_property(
            w0 in 0.0..TWO_PI, w1 in 0.0..TWO_PI,
            s in -20.0..20.0f64, t in -20.0..20.0f64,
        ) {
            let nu = [1.0, std::f64::consts::SQRT_2];
            let a = exact_torus_flow(exact_torus_flow([w0, w1], nu, s), nu, t);
            let b = exact_torus_flow([w0, w1], nu, s + t);
            for i in 0..2 {
                let mut d = (a[i] - b[i]).abs();
                d = d.min(TWO_PI - d); // distance on the circle
                prop_assert!(d < 1e-12, "components differ by {}", d);
            }
        }

        #[test]
        fn delay_embed_row_count_and_base(values in proptest::collection::vec(-10.0..10.0f64, 3..40), q in 1usize..4) {
            prop_assume!(q <= values.len());
            let data = dataset_1d(&values);
            let e = delay_embed(&data, q).unwrap();
            prop_assert_eq!(e.rows.nrows(), values.len() - q + 1);
            for r in 0..e.rows.nrows() {
                prop_assert_eq!(e.rows[[r, 0]], values[r + q - 1]);
            }
        }
    }
}
