//! Machine-readable run reports. Field names are part of the stable
//! interface; reports are byte-identical for identical (inputs, seed,
//! scheme, version).

use serde::Serialize;

#[derive(Serialize, Clone, Debug, Default)]
pub struct ToleranceEcho {
    pub theorem1: f64,
    pub lagrangian: f64,
    pub horizontality: f64,
    pub second_form: f64,
    pub invariant: f64,
    pub algebraic: f64,
    pub loop_integral: f64,
}

#[derive(Serialize, Clone, Debug, Default)]
pub struct ConfigEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entry: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub samples: usize,
    pub seed: u64,
    pub scheme: String,
    pub tolerances: ToleranceEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_request: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Serialize, Clone, Debug)]
pub struct InvariantRecord {
    pub j: usize,
    pub k: usize,
    pub cot_theta_diff: f64,
    pub curvature_ratio: f64,
    pub sign: i8,
    pub residual: f64,
}

#[derive(Serialize, Clone, Debug)]
pub struct PointRecord {
    pub coords: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub residual_theorem1: f64,
    pub residual_lagrangian: f64,
    pub residual_horizontality: f64,
    pub residual_second_form: f64,
    pub residual_angle_decomposition: f64,
    pub invariants: Vec<InvariantRecord>,
}

#[derive(Serialize, Clone, Debug)]
pub struct SweepRecord {
    pub t: f64,
    pub degenerate: bool,
    pub max_projector_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_lambda_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_theta_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_invariant_residual: Option<f64>,
}

#[derive(Serialize, Clone, Debug)]
pub struct QuadricRecord {
    pub n: usize,
    pub lemma1_max_residual: f64,
    pub curvature_antisymmetry: f64,
    pub curvature_pair_symmetry: f64,
    pub curvature_bianchi: f64,
    pub einstein_constant: f64,
    pub einstein_residual: f64,
    pub lemma2_max_rest: f64,
    pub lemma2_max_s: f64,
    pub lemma2_curves: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sectional_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sectional_max: Option<f64>,
}

#[derive(Serialize, Clone, Debug)]
pub struct ReconstructionRecord {
    pub t: f64,
    pub margin: f64,
    pub loop_residual: f64,
    pub horizontality_residual: f64,
    pub max_projector_distance: f64,
    pub min_immersion_margin: f64,
    pub samples: Vec<ReconstructedSample>,
}

#[derive(Serialize, Clone, Debug)]
pub struct ReconstructedSample {
    pub coords: Vec<f64>,
    pub position: Vec<f64>,
    pub normal: Vec<f64>,
}

#[derive(Serialize, Clone, Debug)]
pub struct SuiteVerdict {
    pub name: String,
    pub passed: bool,
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Serialize, Clone, Debug)]
pub struct RunReport {
    pub version: String,
    pub command: String,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadric: Option<QuadricRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<ReconstructionRecord>,
    pub suites: Vec<SuiteVerdict>,
    pub passed: bool,
    /// Populated only with --timings; kept out of the default output so that
    /// reports stay byte-identical across runs. Wall-clock time always goes
    /// to stderr.
    pub timing_ms: Option<u128>,
}

impl RunReport {
    pub fn new(command: &str, config: ConfigEcho) -> Self {
        RunReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            points: Vec::new(),
            sweep: Vec::new(),
            quadric: None,
            reconstruction: None,
            suites: Vec::new(),
            passed: true,
            timing_ms: None,
        }
    }

    pub fn push_suite(&mut self, name: &str, worst: f64, tolerance: f64) {
        let passed = worst.is_finite() && worst <= tolerance;
        self.suites.push(SuiteVerdict {
            name: name.to_string(),
            passed,
            worst,
            tolerance,
        });
        self.passed &= passed;
    }

    /// A suite where the measurement must EXCEED the bound (witness checks).
    pub fn push_suite_at_least(&mut self, name: &str, value: f64, bound: f64) {
        let passed = value.is_finite() && value >= bound;
        self.suites.push(SuiteVerdict {
            name: name.to_string(),
            passed,
            worst: value,
            tolerance: bound,
        });
        self.passed &= passed;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Per-point records as CSV, one row per point.
    pub fn points_csv(&self) -> String {
        let mut out = String::new();
        let Some(first) = self.points.first() else {
            return out;
        };
        let n = first.coords.len();
        let m = first.lambdas.len();
        let mut header: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        header.extend((0..m).map(|j| format!("lambda{j}")));
        header.extend((0..m).map(|j| format!("theta{j}")));
        header.extend(
            [
                "res_theorem1",
                "res_lagrangian",
                "res_horizontality",
                "res_second_form",
                "res_angle_decomposition",
            ]
            .map(String::from),
        );
        out.push_str(&header.join(","));
        out.push('\n');
        for p in &self.points {
            let mut row: Vec<String> = p.coords.iter().map(|x| format!("{x}")).collect();
            row.extend(p.lambdas.iter().map(|x| format!("{x}")));
            row.extend(p.thetas.iter().map(|x| format!("{x}")));
            row.push(format!("{}", p.residual_theorem1));
            row.push(format!("{}", p.residual_lagrangian));
            row.push(format!("{}", p.residual_horizontality));
            row.push(format!("{}", p.residual_second_form));
            row.push(format!("{}", p.residual_angle_decomposition));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
