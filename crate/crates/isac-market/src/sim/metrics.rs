use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use super::transaction::{Strategy, TrialOutcome};
use crate::error::{Error, Result};

/// The per-trial numbers reported for every strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub social_welfare: f64,
    pub mu_utility: f64,
    pub bs_utility: f64,
    pub rt_ms: f64,
    pub ni: f64,
    pub dibc_ms: f64,
    /// Interaction energy, J.
    pub ecibc_w: f64,
    pub rdslc_b: f64,
    pub rdslc_p: f64,
    pub drlc: f64,
}

impl TrialMetrics {
    pub const NAMES: [&'static str; 10] = [
        "social_welfare",
        "mu_utility",
        "bs_utility",
        "rt_ms",
        "ni",
        "dibc_ms",
        "ecibc_w",
        "rdslc_b",
        "rdslc_p",
        "drlc",
    ];

    pub fn of(o: &TrialOutcome) -> Self {
        Self {
            social_welfare: o.social_welfare(),
            mu_utility: o.mu_utility(),
            bs_utility: o.bs_utility(),
            rt_ms: o.rt_ms,
            ni: o.interactions() as f64,
            dibc_ms: o.dibc_ms,
            ecibc_w: o.ecibc_j,
            rdslc_b: o.rdslc_b,
            rdslc_p: o.rdslc_p,
            drlc: o.drlc(),
        }
    }

    pub fn values(&self) -> [f64; 10] {
        [
            self.social_welfare,
            self.mu_utility,
            self.bs_utility,
            self.rt_ms,
            self.ni,
            self.dibc_ms,
            self.ecibc_w,
            self.rdslc_b,
            self.rdslc_p,
            self.drlc,
        ]
    }

    fn from_values(v: [f64; 10]) -> Self {
        Self {
            social_welfare: v[0],
            mu_utility: v[1],
            bs_utility: v[2],
            rt_ms: v[3],
            ni: v[4],
            dibc_ms: v[5],
            ecibc_w: v[6],
            rdslc_b: v[7],
            rdslc_p: v[8],
            drlc: v[9],
        }
    }
}

/// One line of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario_id: String,
    pub strategy: Strategy,
    pub n_mus: usize,
    pub n_bss: usize,
    pub trial: u64,
    pub metrics: TrialMetrics,
    /// Sweep axis name and value, for sweep tables.
    pub axis: Option<(String, f64)>,
}

pub const RESULT_COLUMNS: [&str; 15] = [
    "scenario_id",
    "strategy",
    "n_mus",
    "n_bss",
    "trial",
    "social_welfare",
    "mu_utility",
    "bs_utility",
    "rt_ms",
    "ni",
    "dibc_ms",
    "ecibc_w",
    "rdslc_b",
    "rdslc_p",
    "drlc",
];

/// Writes the results table. Sweep tables carry two extra trailing
/// columns, `axis` and `axis_value`.
pub fn write_results<W: Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let sweep = rows.iter().any(|r| r.axis.is_some());
    let mut wr = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = RESULT_COLUMNS.to_vec();
    if sweep {
        header.extend(["axis", "axis_value"]);
    }
    wr.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.scenario_id.clone(),
            r.strategy.name().to_string(),
            r.n_mus.to_string(),
            r.n_bss.to_string(),
            r.trial.to_string(),
        ];
        rec.extend(r.metrics.values().iter().map(|v| v.to_string()));
        if sweep {
            let (a, v) = r.axis.clone().unwrap_or_default();
            rec.push(a);
            rec.push(v.to_string());
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads a results table, checking the documented columns are present.
pub fn read_results<R: Read>(r: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Input(format!("results table lacks column {name:?}")))
    };
    let idx: Vec<usize> = RESULT_COLUMNS.iter().map(|c| col(c)).collect::<Result<_>>()?;
    let axis = (headers.iter().position(|h| h == "axis"), headers.iter().position(|h| h == "axis_value"));
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k as u64 + 2;
        let perr = |msg: String| Error::Parse { path: "results".into(), line, msg };
        let rec = rec.map_err(|e| perr(e.to_string()))?;
        let get = |i: usize| rec.get(idx[i]).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            get(i).parse::<f64>().map_err(|_| perr(format!("{} {:?} is not a number", RESULT_COLUMNS[i], get(i))))
        };
        let int = |i: usize| -> Result<u64> {
            get(i).parse::<u64>().map_err(|_| perr(format!("{} {:?} is not an integer", RESULT_COLUMNS[i], get(i))))
        };
        let mut v = [0.0; 10];
        for (j, slot) in v.iter_mut().enumerate() {
            *slot = num(5 + j)?;
        }
        let axis = match axis {
            (Some(a), Some(b)) => {
                let raw = rec.get(b).unwrap_or("");
                let val = raw.parse::<f64>().map_err(|_| perr(format!("axis_value {raw:?} is not a number")))?;
                Some((rec.get(a).unwrap_or("").to_string(), val))
            }
            _ => None,
        };
        out.push(ResultRow {
            scenario_id: get(0).to_string(),
            strategy: get(1).parse().map_err(|e: Error| perr(e.to_string()))?,
            n_mus: int(2)? as usize,
            n_bss: int(3)? as usize,
            trial: int(4)?,
            metrics: TrialMetrics::from_values(v),
            axis,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std_err: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Self::default();
        }
        let mean = xs.iter().sum::<f64>() / n;
        if xs.len() < 2 {
            return Self { mean, std_err: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { mean, std_err: (var / n).sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: Strategy,
    pub n_trials: usize,
    pub social_welfare: Summary,
    pub mu_utility: Summary,
    pub bs_utility: Summary,
    pub rt_ms: Summary,
    pub ni: Summary,
    pub dibc_ms: Summary,
    pub ecibc_w: Summary,
    pub rdslc_b: Summary,
    pub rdslc_p: Summary,
    pub drlc: Summary,
}

impl StrategyReport {
    pub fn from_metrics(strategy: Strategy, ms: &[TrialMetrics]) -> Self {
        let s = |f: fn(&TrialMetrics) -> f64| Summary::of(&ms.iter().map(f).collect::<Vec<_>>());
        Self {
            strategy,
            n_trials: ms.len(),
            social_welfare: s(|m| m.social_welfare),
            mu_utility: s(|m| m.mu_utility),
            bs_utility: s(|m| m.bs_utility),
            rt_ms: s(|m| m.rt_ms),
            ni: s(|m| m.ni),
            dibc_ms: s(|m| m.dibc_ms),
            ecibc_w: s(|m| m.ecibc_w),
            rdslc_b: s(|m| m.rdslc_b),
            rdslc_p: s(|m| m.rdslc_p),
            drlc: s(|m| m.drlc),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub strategies: Vec<StrategyReport>,
}

impl MetricsReport {
    pub fn get(&self, s: Strategy) -> Option<&StrategyReport> {
        self.strategies.iter().find(|r| r.strategy == s)
    }
}

/// Groups outcomes by strategy, in order of first appearance.
pub fn compute_metrics(outcomes: &[TrialOutcome]) -> MetricsReport {
    let mut order: Vec<Strategy> = Vec::new();
    for o in outcomes {
        if !order.contains(&o.strategy) {
            order.push(o.strategy);
        }
    }
    let strategies = order
        .into_iter()
        .map(|s| {
            let ms: Vec<TrialMetrics> = outcomes.iter().filter(|o| o.strategy == s).map(TrialMetrics::of).collect();
            StrategyReport::from_metrics(s, &ms)
        })
        .collect();
    MetricsReport { strategies }
}

/// Same aggregation starting from table rows.
pub fn report_from_rows(rows: &[ResultRow]) -> MetricsReport {
    let mut order: Vec<Strategy> = Vec::new();
    for r in rows {
        if !order.contains(&r.strategy) {
            order.push(r.strategy);
        }
    }
    MetricsReport {
        strategies: order
            .into_iter()
            .map(|s| {
                let ms: Vec<TrialMetrics> = rows.iter().filter(|r| r.strategy == s).map(|r| r.metrics).collect();
                StrategyReport::from_metrics(s, &ms)
            })
            .collect(),
    }
}
