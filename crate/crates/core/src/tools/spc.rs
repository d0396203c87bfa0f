//! X-bar/R control charts, Western Electric run rules and capability
//! indices.
//!
//! The chart constants are computed from the distribution of the range of
//! `n` independent standard normals rather than read from a table.

use std::sync::OnceLock;

use serde::Serialize;
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::diagnostic::{Diagnostic, Subject};
use crate::rules;

pub const SUBGROUP_SIZES: std::ops::RangeInclusive<usize> = 2..=10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpcError {
    #[error("subgroup size {0} is outside 2..10")]
    InvalidSubgroupSize(usize),
    #[error("{subgroups} subgroup(s) given; at least 2 are needed")]
    InsufficientData { subgroups: usize },
    #[error("subgroup {index} has {found} values, expected {expected}")]
    RaggedSubgroup {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("subgroup {index} contains a non-finite value")]
    NonFinite { index: usize },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("average range is zero; capability is undefined")]
    ZeroDispersion,
    #[error("upper limit {usl} must exceed lower limit {lsl}")]
    InvalidLimits { usl: f64, lsl: f64 },
}

/// Chart constants for subgroup size `n`.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpcConstants {
    pub n: usize,
    /// Mean of the range of `n` standard normals.
    pub d2: f64,
    /// Standard deviation of that range.
    pub d3: f64,
    pub A2: f64,
    pub D3: f64,
    pub D4: f64,
}

fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Composite Simpson weights for `m` (even) intervals.
fn simpson_weight(i: usize, m: usize) -> f64 {
    if i == 0 || i == m {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

const HALF_WIDTH: f64 = 8.0;
const STEPS: usize = 800;

/// First two moments of the range of `n` standard normals by quadrature:
///
/// E[R]  = ∫ 1 − Φ(x)ⁿ − (1 − Φ(x))ⁿ dx
/// E[R²] = 2 ∫∫_{x<y} 1 − Φ(y)ⁿ − (1 − Φ(x))ⁿ + (Φ(y) − Φ(x))ⁿ dx dy
///
/// The double integral is taken over x and t = y − x ≥ 0 so that the
/// integrand is smooth on a rectangle.
fn range_moments(n: usize) -> (f64, f64) {
    let h = 2.0 * HALF_WIDTH / STEPS as f64;
    let n = n as i32;
    // Φ on the grid x = −W + k·h for k in 0..=2·STEPS covers x + t.
    let cdf: Vec<f64> = (0..=2 * STEPS).map(|k| phi(-HALF_WIDTH + k as f64 * h)).collect();

    let mut mean = 0.0;
    for (i, &f) in cdf.iter().enumerate().take(STEPS + 1) {
        mean += simpson_weight(i, STEPS) * (1.0 - f.powi(n) - (1.0 - f).powi(n));
    }
    mean *= h / 3.0;

    let mut second = 0.0;
    for i in 0..=STEPS {
        let fx = cdf[i];
        let lower = (1.0 - fx).powi(n);
        let mut row = 0.0;
        for j in 0..=STEPS {
            let fy = cdf[i + j];
            row += simpson_weight(j, STEPS) * (1.0 - fy.powi(n) - lower + (fy - fx).powi(n));
        }
        second += simpson_weight(i, STEPS) * row;
    }
    second *= 2.0 * (h / 3.0) * (h / 3.0);
    (mean, second)
}

pub fn spc_constants(n: usize) -> Result<SpcConstants, SpcError> {
    if !SUBGROUP_SIZES.contains(&n) {
        return Err(SpcError::InvalidSubgroupSize(n));
    }
    static MOMENTS: [OnceLock<(f64, f64)>; 11] = [const { OnceLock::new() }; 11];
    let (d2, second) = *MOMENTS[n].get_or_init(|| range_moments(n));
    let d3 = (second - d2 * d2).max(0.0).sqrt();
    Ok(SpcConstants {
        n,
        d2,
        d3,
        A2: 3.0 / (d2 * (n as f64).sqrt()),
        D3: (1.0 - 3.0 * d3 / d2).max(0.0),
        D4: 1.0 + 3.0 * d3 / d2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgroupSeries {
    n: usize,
    subgroups: Vec<Vec<f64>>,
    pub characteristic: Option<String>,
}

impl SubgroupSeries {
    pub fn new(subgroups: Vec<Vec<f64>>) -> Result<Self, SpcError> {
        let n = subgroups.first().map_or(0, Vec::len);
        if !SUBGROUP_SIZES.contains(&n) {
            return Err(SpcError::InvalidSubgroupSize(n));
        }
        for (i, g) in subgroups.iter().enumerate() {
            if g.len() != n {
                return Err(SpcError::RaggedSubgroup {
                    index: i + 1,
                    expected: n,
                    found: g.len(),
                });
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(SpcError::NonFinite { index: i + 1 });
            }
        }
        if subgroups.len() < 2 {
            return Err(SpcError::InsufficientData {
                subgroups: subgroups.len(),
            });
        }
        Ok(SubgroupSeries {
            n,
            subgroups,
            characteristic: None,
        })
    }

    pub fn subgroup_size(&self) -> usize {
        self.n
    }

    pub fn subgroups(&self) -> &[Vec<f64>] {
        &self.subgroups
    }

    pub fn len(&self) -> usize {
        self.subgroups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subgroups.is_empty()
    }

    pub fn means(&self) -> Vec<f64> {
        self.subgroups
            .iter()
            .map(|g| g.iter().sum::<f64>() / self.n as f64)
            .collect()
    }

    pub fn ranges(&self) -> Vec<f64> {
        self.subgroups
            .iter()
            .map(|g| {
                let max = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let min = g.iter().copied().fold(f64::INFINITY, f64::min);
                max - min
            })
            .collect()
    }
}

/// Reads one subgroup per line, values separated by whitespace; `#`
/// starts a comment.
pub fn parse_series(text: &str) -> Result<SubgroupSeries, SpcError> {
    let mut subgroups = Vec::new();
    let mut first_line = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let values = content
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| SpcError::Parse {
                    line: i + 1,
                    reason: format!("`{t}` is not a number"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        first_line.push(i + 1);
        subgroups.push(values);
    }
    SubgroupSeries::new(subgroups).map_err(|e| match e {
        SpcError::RaggedSubgroup { index, .. } | SpcError::NonFinite { index } => SpcError::Parse {
            line: first_line[index - 1],
            reason: e.to_string(),
        },
        other => other,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Xbar,
    Range,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlChart {
    pub kind: ChartKind,
    pub center: f64,
    pub ucl: f64,
    pub lcl: f64,
    pub constants: SpcConstants,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Charts {
    pub xbar: ControlChart,
    pub range: ControlChart,
}

pub fn build_charts(series: &SubgroupSeries) -> Result<Charts, SpcError> {
    if series.len() < 2 {
        return Err(SpcError::InsufficientData {
            subgroups: series.len(),
        });
    }
    let c = spc_constants(series.n)?;
    let k = series.len() as f64;
    let grand_mean = series.means().iter().sum::<f64>() / k;
    let r_bar = series.ranges().iter().sum::<f64>() / k;
    Ok(Charts {
        xbar: ControlChart {
            kind: ChartKind::Xbar,
            center: grand_mean,
            ucl: grand_mean + c.A2 * r_bar,
            lcl: grand_mean - c.A2 * r_bar,
            constants: c,
        },
        range: ControlChart {
            kind: ChartKind::Range,
            center: r_bar,
            ucl: c.D4 * r_bar,
            lcl: c.D3 * r_bar,
            constants: c,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RunRule {
    #[serde(rename = "WE-1")]
    BeyondLimits,
    #[serde(rename = "WE-2")]
    NineOnOneSide,
    #[serde(rename = "WE-3")]
    SixTrending,
}

impl RunRule {
    pub fn rule(self) -> &'static rules::Rule {
        match self {
            RunRule::BeyondLimits => &rules::S_WE1,
            RunRule::NineOnOneSide => &rules::S_WE2,
            RunRule::SixTrending => &rules::S_WE3,
        }
    }

    pub fn code(self) -> &'static str {
        self.rule().code
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    /// 1-based subgroup number.
    pub subgroup: usize,
    pub rule: RunRule,
    pub chart: ChartKind,
}

impl Violation {
    pub fn to_diagnostic(&self) -> Diagnostic {
        let chart = match self.chart {
            ChartKind::Xbar => "x-bar",
            ChartKind::Range => "range",
        };
        self.rule().diag(
            Subject::Subgroup { index: self.subgroup },
            format!("{} on the {chart} chart", self.rule.rule().description),
        )
    }

    fn rule(&self) -> &'static rules::Rule {
        self.rule.rule()
    }
}

const RUN_LENGTH: usize = 9;
const TREND_LENGTH: usize = 6;

/// Applies WE-1 to both charts, and WE-2 and WE-3 to the subgroup means.
/// A point is flagged by WE-2 or WE-3 when the run ending at it is long
/// enough, so a run of ten on one side flags its ninth and tenth points.
pub fn detect_violations(charts: &Charts, series: &SubgroupSeries) -> Vec<Violation> {
    let means = series.means();
    let ranges = series.ranges();
    let mut out = Vec::new();
    let mut push = |i: usize, rule, chart| {
        out.push(Violation {
            subgroup: i + 1,
            rule,
            chart,
        })
    };

    for (chart, values) in [(&charts.xbar, &means), (&charts.range, &ranges)] {
        for (i, v) in values.iter().enumerate() {
            if *v > chart.ucl || *v < chart.lcl {
                push(i, RunRule::BeyondLimits, chart.kind);
            }
        }
    }

    let center = charts.xbar.center;
    let mut side_run = 0usize;
    let mut last_side = 0i8;
    for (i, m) in means.iter().enumerate() {
        let side = if *m > center {
            1
        } else if *m < center {
            -1
        } else {
            0
        };
        side_run = if side != 0 && side == last_side {
            side_run + 1
        } else {
            usize::from(side != 0)
        };
        last_side = side;
        if side_run >= RUN_LENGTH {
            push(i, RunRule::NineOnOneSide, ChartKind::Xbar);
        }
    }

    let mut trend = 1usize;
    let mut direction = 0i8;
    for i in 1..means.len() {
        let step = if means[i] > means[i - 1] {
            1
        } else if means[i] < means[i - 1] {
            -1
        } else {
            0
        };
        trend = match step {
            0 => 1,
            s if s == direction => trend + 1,
            _ => 2,
        };
        direction = step;
        if trend >= TREND_LENGTH {
            push(i, RunRule::SixTrending, ChartKind::Xbar);
        }
    }

    out.sort();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapabilityResult {
    pub usl: f64,
    pub lsl: f64,
    pub mean: f64,
    pub sigma_hat: f64,
    pub cp: f64,
    pub cpk: f64,
}

/// Cp and Cpk with σ̂ = R̄/d2 and μ̂ the grand mean.
pub fn capability(series: &SubgroupSeries, usl: f64, lsl: f64) -> Result<CapabilityResult, SpcError> {
    if !(usl.is_finite() && lsl.is_finite() && usl > lsl) {
        return Err(SpcError::InvalidLimits { usl, lsl });
    }
    let charts = build_charts(series)?;
    let r_bar = charts.range.center;
    if r_bar <= 0.0 {
        return Err(SpcError::ZeroDispersion);
    }
    let sigma_hat = r_bar / charts.xbar.constants.d2;
    let mean = charts.xbar.center;
    Ok(CapabilityResult {
        usl,
        lsl,
        mean,
        sigma_hat,
        cp: (usl - lsl) / (6.0 * sigma_hat),
        cpk: (usl - mean).min(mean - lsl) / (3.0 * sigma_hat),
    })
}
