//! Runs a scenario and collects every table, series and residual it produces.

use qrs_core::bell::{
    ancilla_experiment, chsh, correlation_entangled, correlation_factorized,
    correlation_postulate_c, device_marginal, device_marginal_closed_form, entangled_pair_state,
    evolve_experiment, intro_measurement, intuitive_joint, measured_reference, outcome_basis,
    pair_basis, ChshAngles, CorrelationTable, CorrelatorKind, ExperimentConfig, Side, A1, A2, M1,
    M2, P1, P2,
};
use qrs_core::calculus::{joint_distribution, state_of, JointDistribution, ReferenceSystem};
use qrs_core::linalg::{StateVector, SystemSet};
use qrs_core::Result;
use serde::{Deserialize, Serialize};

use crate::config::{Grid, Scenario, ScenarioSpec};

/// Residuals at or above this fail the run.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Draws landing on cells whose probability is below this are counted as impossible.
const IMPOSSIBLE: f64 = 1e-15;

/// The run parameters, as echoed in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecEcho {
    pub scenario: Scenario,
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub theta1: f64,
    pub theta2: f64,
    pub angles: [f64; 4],
    pub grid: Option<Grid>,
    pub seed: Option<u64>,
    pub samples: u64,
}

impl From<&ScenarioSpec> for SpecEcho {
    fn from(spec: &ScenarioSpec) -> Self {
        Self {
            scenario: spec.scenario,
            a: [spec.a.re, spec.a.im],
            b: [spec.b.re, spec.b.im],
            theta1: spec.theta1,
            theta2: spec.theta2,
            angles: spec.angles.as_array(),
            grid: spec.grid,
            seed: spec.seed,
            samples: spec.samples,
        }
    }
}

/// A probability table over candidate indices, row-major, zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    pub kind: String,
    pub axes: Vec<String>,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl ProbabilityTable {
    pub fn from_distribution(kind: &str, dist: &JointDistribution) -> Self {
        Self {
            kind: kind.to_string(),
            axes: dist.axes().iter().map(|(s, _)| s.to_string()).collect(),
            shape: dist.shape(),
            values: dist.probabilities().to_vec(),
        }
    }

    pub fn from_correlation(kind: &str, table: &CorrelationTable) -> Self {
        Self {
            kind: kind.to_string(),
            axes: vec![M1.into(), M2.into()],
            shape: vec![2, 2],
            values: table.table.iter().flatten().copied().collect(),
        }
    }

    fn vector(kind: &str, axis: &str, values: [f64; 2]) -> Self {
        Self {
            kind: kind.to_string(),
            axes: vec![axis.into()],
            shape: vec![2],
            values: values.to_vec(),
        }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Row-major position of `indices`.
    pub fn flat_index(&self, indices: &[usize]) -> usize {
        indices
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (i, n)| acc * n + i)
    }

    /// Indices of the cell at row-major position `flat`.
    pub fn indices(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.len()];
        for (slot, n) in out.iter_mut().zip(&self.shape).rev() {
            *slot = flat % n;
            flat /= n;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &ProbabilityTable) -> f64 {
        assert_eq!(self.shape, other.shape, "table shapes differ");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// A reduced density matrix, split into real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub name: String,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scalar {
    pub name: String,
    pub value: f64,
}

/// CHSH values at one setting quadruple; `t` is set for family scans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshPoint {
    pub t: Option<f64>,
    pub angles: [f64; 4],
    pub entangled: f64,
    pub factorized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingReport {
    /// Kind of the table that was sampled.
    pub source: String,
    pub seed: u64,
    pub samples: u64,
    pub counts: Vec<u64>,
    /// Largest `|f - p| / σ` over cells with `0 < p < 1`, `σ² = p(1-p)/n`.
    pub max_sigma: f64,
    /// Draws that fell on cells of (numerically) zero probability.
    pub impossible_draws: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub spec: SpecEcho,
    pub tables: Vec<ProbabilityTable>,
    pub matrices: Vec<MatrixReport>,
    pub scalars: Vec<Scalar>,
    pub chsh: Vec<ChshPoint>,
    pub sampling: Option<SamplingReport>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl RunReport {
    pub fn table(&self, kind: &str) -> Option<&ProbabilityTable> {
        self.tables.iter().find(|t| t.kind == kind)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.value)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Default)]
struct Builder {
    tables: Vec<ProbabilityTable>,
    matrices: Vec<MatrixReport>,
    scalars: Vec<Scalar>,
    chsh: Vec<ChshPoint>,
    checks: Vec<Check>,
    sample_source: Option<(&'static str, JointDistribution)>,
}

impl Builder {
    fn check(&mut self, name: &str, residual: f64) {
        self.checks.push(Check {
            name: name.to_string(),
            residual,
            tolerance: RESIDUAL_TOLERANCE,
            // NaN fails
            passed: residual < RESIDUAL_TOLERANCE,
        });
    }

    fn scalar(&mut self, name: &str, value: f64) {
        self.scalars.push(Scalar {
            name: name.to_string(),
            value,
        });
    }

    fn norm_check(&mut self, state: &StateVector) {
        self.check("state_norm", (state.norm() - 1.0).abs());
    }
}

fn single(label: &str) -> SystemSet {
    SystemSet::single(label)
}

fn config_of(spec: &ScenarioSpec) -> Result<ExperimentConfig> {
    ExperimentConfig::new(spec.a, spec.b, spec.theta1, spec.theta2)
}

fn intro(spec: &ScenarioSpec, out: &mut Builder) -> Result<()> {
    let state = intro_measurement(spec.a, spec.b)?;
    out.norm_check(&state);
    let reference =
        ReferenceSystem::isolated(state).with_candidate_basis(single("M"), outcome_basis("M"))?;

    let rho = state_of(&single("M"), &reference)?;
    let expected = [0.0, spec.a.norm_sqr(), spec.b.norm_sqr()];
    let mut residual: f64 = 0.0;
    for r in 0..3 {
        for c in 0..3 {
            let target = if r == c { expected[r] } else { 0.0 };
            residual = residual.max((rho.matrix()[(r, c)] - target).norm());
        }
    }
    out.check("device_state_closed_form", residual);
    out.matrices.push(MatrixReport {
        name: "rho_M".into(),
        re: (0..3)
            .map(|r| (0..3).map(|c| rho.matrix()[(r, c)].re).collect())
            .collect(),
        im: (0..3)
            .map(|r| (0..3).map(|c| rho.matrix()[(r, c)].im).collect())
            .collect(),
    });

    let dist = joint_distribution(&[single("M")], &reference)?;
    let weights = ProbabilityTable::vector("closed_form", "M", [expected[1], expected[2]]);
    let table = ProbabilityTable::from_distribution("device_candidates", &dist);
    out.check("candidate_weights", table.max_abs_diff(&weights));
    out.tables.push(table);
    out.sample_source = Some(("device_candidates", dist));
    Ok(())
}

fn pair(spec: &ScenarioSpec, out: &mut Builder) -> Result<()> {
    let config = config_of(spec)?;
    let state = entangled_pair_state(&config)?;
    out.norm_check(&state);
    let reference = ReferenceSystem::isolated(state)
        .with_candidate_basis(single(P1), pair_basis(Side::First).to_vec())?
        .with_candidate_basis(single(P2), pair_basis(Side::Second).to_vec())?;
    let dist = joint_distribution(&[single(P1), single(P2)], &reference)?;
    let table = ProbabilityTable::from_distribution("pair_joint", &dist);

    let c = config.coefficients();
    let mut diagonal = table.clone();
    diagonal.kind = "closed_form".into();
    diagonal.values = vec![c[0].norm_sqr(), 0.0, 0.0, c[1].norm_sqr()];
    out.check("pair_closed_form", table.max_abs_diff(&diagonal));
    out.tables.push(table);
    out.sample_source = Some(("pair_joint", dist));
    Ok(())
}

fn bell(spec: &ScenarioSpec, out: &mut Builder) -> Result<()> {
    let config = config_of(spec)?;
    let entangled = correlation_entangled(&config)?;
    let factorized = correlation_factorized(&config)?;

    let state = evolve_experiment(&config)?;
    out.norm_check(&state);
    let reference = measured_reference(state.clone())?;
    let dist = joint_distribution(&[single(M1), single(M2)], &reference)?;
    let postulate = ProbabilityTable::from_distribution("postulate_c", &dist);
    let entangled_table = ProbabilityTable::from_correlation("entangled", &entangled);
    out.check(
        "route_equivalence",
        postulate.max_abs_diff(&entangled_table),
    );

    for (side, label) in [(Side::First, M1), (Side::Second, M2)] {
        let computed = device_marginal(&state, side)?;
        let closed = device_marginal_closed_form(&config, side);
        let from_table = match side {
            Side::First => entangled.first_marginal(),
            Side::Second => entangled.second_marginal(),
        };
        let from_factorized = match side {
            Side::First => factorized.first_marginal(),
            Side::Second => factorized.second_marginal(),
        };
        let residual = (0..2)
            .map(|j| {
                (computed[j] - closed[j])
                    .abs()
                    .max((from_table[j] - closed[j]).abs())
                    .max((from_factorized[j] - closed[j]).abs())
            })
            .fold(0.0, f64::max);
        out.check(&format!("marginal_{label}"), residual);
        out.tables.push(ProbabilityTable::vector(
            &format!("marginal_{label}"),
            label,
            computed,
        ));
    }

    out.scalar("correlator_entangled", entangled.correlator());
    out.scalar("correlator_factorized", factorized.correlator());
    out.scalar(
        "entangled_factorized_gap",
        entangled.max_abs_diff(&factorized),
    );
    out.tables.insert(0, entangled_table);
    out.tables.insert(
        1,
        ProbabilityTable::from_correlation("factorized", &factorized),
    );
    out.tables.insert(2, postulate);
    out.sample_source = Some(("postulate_c", dist));
    Ok(())
}

fn bell_ancilla(spec: &ScenarioSpec, out: &mut Builder) -> Result<()> {
    let config = config_of(spec)?.with_ancilla(true);
    let state = ancilla_experiment(&config)?;
    out.norm_check(&state);
    let reference = measured_reference(state)?;

    let joint = joint_distribution(
        &[single(A1), single(A2), single(M1), single(M2)],
        &reference,
    )?;
    let joint_table = ProbabilityTable::from_distribution("ancilla_joint", &joint);
    let mut intuitive = joint_table.clone();
    intuitive.kind = "intuitive".into();
    intuitive.values = intuitive_joint(&config).values().to_vec();
    out.check(
        "ancilla_matches_intuitive",
        joint_table.max_abs_diff(&intuitive),
    );

    let devices = joint_distribution(&[single(M1), single(M2)], &reference)?;
    let devices_table = ProbabilityTable::from_distribution("ancilla_devices", &devices);
    let factorized =
        ProbabilityTable::from_correlation("factorized", &correlation_factorized(&config)?);
    out.check(
        "ancilla_matches_factorized",
        devices_table.max_abs_diff(&factorized),
    );
    let collapsed = ProbabilityTable::from_distribution("collapsed", &joint.marginal(&[2, 3]));
    out.check(
        "ancilla_marginal_consistency",
        devices_table.max_abs_diff(&collapsed),
    );

    let without = config.with_ancilla(false);
    let entangled =
        ProbabilityTable::from_correlation("entangled", &correlation_entangled(&without)?);
    out.scalar(
        "ancilla_entangled_gap",
        devices_table.max_abs_diff(&entangled),
    );

    out.tables
        .extend([joint_table, intuitive, devices_table, factorized, entangled]);
    out.sample_source = Some(("ancilla_joint", joint));
    Ok(())
}

fn chsh_scan(spec: &ScenarioSpec, out: &mut Builder) -> Result<()> {
    let settings: Vec<(Option<f64>, ChshAngles)> = match &spec.grid {
        Some(grid) => grid
            .points()
            .into_iter()
            .map(|t| (Some(t), ChshAngles::family(t)))
            .collect(),
        None => vec![(None, spec.angles)],
    };
    let mut route: f64 = 0.0;
    let mut excess: f64 = 0.0;
    for (t, angles) in settings {
        let entangled = chsh(CorrelatorKind::Entangled, &angles, spec.a, spec.b)?;
        let factorized = chsh(CorrelatorKind::Factorized, &angles, spec.a, spec.b)?;
        excess = excess.max(factorized.abs() - 2.0);
        for t1 in [angles.alpha, angles.alpha_prime] {
            for t2 in [angles.beta, angles.beta_prime] {
                let config = ExperimentConfig::new(spec.a, spec.b, t1, t2)?;
                let direct = correlation_postulate_c(&config)?;
                route = route.max(direct.max_abs_diff(&correlation_entangled(&config)?));
            }
        }
        out.chsh.push(ChshPoint {
            t,
            angles: angles.as_array(),
            entangled,
            factorized,
        });
    }
    out.check("route_equivalence", route);
    out.check("factorized_bound", excess.max(0.0));
    Ok(())
}

fn sample(dist: &JointDistribution, seed: u64, samples: u64) -> (ProbabilityTable, SamplingReport) {
    let mut freq = ProbabilityTable::from_distribution("empirical", dist);
    let mut counts = vec![0u64; freq.values.len()];
    for draw in dist.sample_many(seed, samples as usize) {
        counts[freq.flat_index(&draw)] += 1;
    }
    let n = samples as f64;
    let mut max_sigma: f64 = 0.0;
    let mut impossible_draws = 0;
    for (&p, &count) in dist.probabilities().iter().zip(&counts) {
        let f = count as f64 / n;
        if p < IMPOSSIBLE {
            impossible_draws += count;
        } else if p < 1.0 - IMPOSSIBLE {
            max_sigma = max_sigma.max((f - p).abs() / (p * (1.0 - p) / n).sqrt());
        }
    }
    freq.values = counts.iter().map(|&c| c as f64 / n).collect();
    let report = SamplingReport {
        source: String::new(),
        seed,
        samples,
        counts,
        max_sigma,
        impossible_draws,
    };
    (freq, report)
}

/// Runs the scenario described by `spec`.
///
/// Errors are failures inside the calculus (invalid tables, bad bases);
/// residual checks that exceed [`RESIDUAL_TOLERANCE`] are reported in
/// [`RunReport::checks`] instead.
pub fn run(spec: &ScenarioSpec) -> Result<RunReport> {
    let mut out = Builder::default();
    match spec.scenario {
        Scenario::IntroMeasurement => intro(spec, &mut out)?,
        Scenario::PairCorrelations => pair(spec, &mut out)?,
        Scenario::Bell => bell(spec, &mut out)?,
        Scenario::BellAncilla => bell_ancilla(spec, &mut out)?,
        Scenario::ChshScan => chsh_scan(spec, &mut out)?,
    }

    let mut sampling = None;
    if spec.samples > 0 {
        if let Some((source, dist)) = &out.sample_source {
            let (freq, mut report) = sample(dist, spec.seed.unwrap_or(0), spec.samples);
            report.source = source.to_string();
            out.tables.push(freq);
            sampling = Some(report);
        }
    }

    let normalization = out
        .tables
        .iter()
        .map(|t| (t.total() - 1.0).abs())
        .fold(0.0, f64::max);
    if !out.tables.is_empty() {
        out.check("table_normalization", normalization);
    }

    let passed = out.checks.iter().all(|c| c.passed);
    Ok(RunReport {
        spec: SpecEcho::from(spec),
        tables: out.tables,
        matrices: out.matrices,
        scalars: out.scalars,
        chsh: out.chsh,
        sampling,
        checks: out.checks,
        passed,
    })
}
