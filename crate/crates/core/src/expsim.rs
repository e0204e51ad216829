//! Coincidence-count simulation and the analysis that turns counts into
//! correlations, a left-hand side `S`, its standard error and the violation
//! significance. The analysis half works the same on ingested counts.
//!
//! Model: each distinct setting pair is measured once per run. Both analyzer
//! angles get an independent uniform error in `[-jitter, +jitter]` degrees,
//! doubled on the Poincaré sphere and applied inside the pair's plane. The
//! four coincidence channels are then independent Poisson variables with
//! means `counts_per_pair * p(alpha, beta)`.

use std::fmt::Write as _;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    rotate_in_plane, MeasurementLayout, PlaneFrame, SettingPair, Slot, UnitVec3,
};
use crate::inequality::{evaluate, evaluate_distinct, EvaluationReport};
use crate::quantum::PolarizationState;

/// Calibrated so that `sigma_E` is about 0.0005 at `|E| = 0.975`.
pub const DEFAULT_COUNTS_PER_PAIR: u64 = 200_000;
pub const DEFAULT_SEED: u64 = 0x01E6_6E77;
pub const MAX_JITTER_DEG: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub state: PolarizationState,
    pub layout: MeasurementLayout,
    pub counts_per_pair: u64,
    pub jitter_deg: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.counts_per_pair == 0 {
            return Err(Error::Input("counts_per_pair must be >= 1".into()));
        }
        if !(0.0..=MAX_JITTER_DEG).contains(&self.jitter_deg) {
            return Err(Error::range(
                "jitter_deg",
                self.jitter_deg,
                0.0,
                MAX_JITTER_DEG,
            ));
        }
        Ok(())
    }
}

/// Coincidences per joint outcome.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub n_pp: u64,
    pub n_pm: u64,
    pub n_mp: u64,
    pub n_mm: u64,
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.n_pp + self.n_pm + self.n_mp + self.n_mm
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatedCorrelation {
    pub value: f64,
    pub sigma: f64,
}

/// `E = (n++ + n-- - n+- - n-+) / total`, `sigma = sqrt((1 - E^2) / total)`.
///
/// The standard error follows from first-order propagation with
/// independent Poisson channels.
pub fn estimate(record: &CountRecord) -> Result<EstimatedCorrelation> {
    let total = record.total();
    if total == 0 {
        return Err(Error::Input("count record has zero coincidences".into()));
    }
    let n = total as f64;
    let same = (record.n_pp + record.n_mm) as f64;
    let diff = (record.n_pm + record.n_mp) as f64;
    let value = (same - diff) / n;
    let sigma = ((1.0 - value * value).max(0.0) / n).sqrt();
    Ok(EstimatedCorrelation { value, sigma })
}

/// Analyzer directions after physical-angle errors `da_deg`, `db_deg`
/// (each doubled on the sphere) inside `frame`.
pub fn perturbed_settings(
    frame: &PlaneFrame,
    pair: &SettingPair,
    da_deg: f64,
    db_deg: f64,
) -> (UnitVec3, UnitVec3) {
    let a_angle = frame.angle_of(&pair.a);
    let b_angle = frame.angle_of(&pair.b);
    (
        rotate_in_plane(frame, a_angle + 2.0 * da_deg.to_radians()),
        rotate_in_plane(frame, b_angle + 2.0 * db_deg.to_radians()),
    )
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("positive finite mean");
    d.sample(rng) as u64
}

/// Simulates one setting pair measured inside `frame`.
pub fn simulate_pair<R: Rng + ?Sized>(
    state: &PolarizationState,
    frame: &PlaneFrame,
    pair: &SettingPair,
    counts_per_pair: u64,
    jitter_deg: f64,
    rng: &mut R,
) -> CountRecord {
    let (da, db) = if jitter_deg > 0.0 {
        (
            rng.random_range(-jitter_deg..=jitter_deg),
            rng.random_range(-jitter_deg..=jitter_deg),
        )
    } else {
        (0.0, 0.0)
    };
    let (a, b) = perturbed_settings(frame, pair, da, db);
    let p = state.outcome_probs(&a, &b);
    let n = counts_per_pair as f64;
    CountRecord {
        n_pp: poisson(n * p.pp, rng),
        n_pm: poisson(n * p.pm, rng),
        n_mp: poisson(n * p.mp, rng),
        n_mm: poisson(n * p.mm, rng),
    }
}

/// Random stream for distinct pair `pair_id` of a run.
pub fn pair_rng(seed: u64, pair_id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pair_id as u64);
    rng
}

/// Result for one distinct setting pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub pair_id: usize,
    /// Every slot of the inequality that reads this measurement.
    pub slots: Vec<Slot>,
    pub a: UnitVec3,
    pub b: UnitVec3,
    pub counts: CountRecord,
    pub estimate: EstimatedCorrelation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub estimates: Vec<PairEstimate>,
    pub evaluation: EvaluationReport<f64>,
}

/// Simulates every distinct pair of the layout and analyzes the counts.
/// Identical configs give identical reports regardless of thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let layout = &config.layout;
    let distinct = layout.distinct();
    let counts: Vec<CountRecord> = (0..distinct.len())
        .into_par_iter()
        .map(|id| {
            let slot = distinct.first_slot(id);
            let frame = layout.plane(slot.group.modulus());
            let mut rng = pair_rng(config.seed, id);
            simulate_pair(
                &config.state,
                frame,
                layout.pair(slot),
                config.counts_per_pair,
                config.jitter_deg,
                &mut rng,
            )
        })
        .collect();
    let rows: Vec<CountRow> = counts
        .iter()
        .enumerate()
        .map(|(pair_id, c)| CountRow::new(pair_id, *c))
        .collect();
    analyze_counts(&rows, layout)
}

/// One line of a counts CSV.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountRow {
    pub pair_id: usize,
    pub n_pp: u64,
    pub n_pm: u64,
    pub n_mp: u64,
    pub n_mm: u64,
}

impl CountRow {
    pub fn new(pair_id: usize, c: CountRecord) -> Self {
        Self {
            pair_id,
            n_pp: c.n_pp,
            n_pm: c.n_pm,
            n_mp: c.n_mp,
            n_mm: c.n_mm,
        }
    }

    pub fn record(&self) -> CountRecord {
        CountRecord {
            n_pp: self.n_pp,
            n_pm: self.n_pm,
            n_mp: self.n_mp,
            n_mm: self.n_mm,
        }
    }
}

/// Runs the estimation and evaluation on measured counts, one row per
/// distinct setting pair of `layout`.
pub fn analyze_counts(rows: &[CountRow], layout: &MeasurementLayout) -> Result<RunReport> {
    let distinct = layout.distinct();
    let mut by_id: Vec<Option<CountRecord>> = vec![None; distinct.len()];
    for row in rows {
        let entry = by_id.get_mut(row.pair_id).ok_or_else(|| {
            Error::Schema(format!(
                "pair_id {} does not exist; layout has {} distinct pairs",
                row.pair_id,
                distinct.len()
            ))
        })?;
        if entry.replace(row.record()).is_some() {
            return Err(Error::Schema(format!("duplicate pair_id {}", row.pair_id)));
        }
    }
    let mut estimates = Vec::with_capacity(distinct.len());
    for (pair_id, counts) in by_id.into_iter().enumerate() {
        let slot = distinct.first_slot(pair_id);
        let counts = counts.ok_or_else(|| {
            Error::Schema(format!(
                "missing counts for pair_id {pair_id} ({} n={})",
                slot.group, slot.n
            ))
        })?;
        let est = estimate(&counts).map_err(|e| Error::Input(format!("pair_id {pair_id}: {e}")))?;
        let p = layout.pair(slot);
        estimates.push(PairEstimate {
            pair_id,
            slots: distinct.occurrences(pair_id).to_vec(),
            a: p.a,
            b: p.b,
            counts,
            estimate: est,
        });
    }
    let values: Vec<f64> = estimates.iter().map(|e| e.estimate.value).collect();
    let sigmas: Vec<f64> = estimates.iter().map(|e| e.estimate.sigma).collect();
    let evaluation = evaluate_distinct(&values, layout, Some(&sigmas))?;
    Ok(RunReport {
        estimates,
        evaluation,
    })
}

pub fn read_counts_csv<R: Read>(reader: R) -> Result<Vec<CountRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let want = ["pair_id", "n_pp", "n_pm", "n_mp", "n_mm"];
    if headers.iter().ne(want.iter().copied()) {
        return Err(Error::Schema(format!(
            "counts header must be {}, found {}",
            want.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize()
        .map(|r| r.map_err(|e| Error::Schema(format!("bad counts row: {e}"))))
        .collect()
}

pub fn write_counts_csv<W: Write>(report: &RunReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for e in &report.estimates {
        w.serialize(CountRow::new(e.pair_id, e.counts))?;
    }
    w.flush()?;
    Ok(())
}

/// Formats with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

impl RunReport {
    /// Human-readable table with one row per measured correlation and the
    /// `S` summary underneath. `state` adds the ideal-theory columns.
    pub fn to_table(
        &self,
        layout: &MeasurementLayout,
        state: Option<&PolarizationState>,
    ) -> String {
        let theory = state.and_then(|s| evaluate(s, layout, None).ok());
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8} {:<22} {:>12} {:>12} {:>12} {:>10}",
            "pair", "slots", "E_theory", "E_measured", "sigma_E", "total"
        );
        for e in &self.estimates {
            let slots = e
                .slots
                .iter()
                .map(|s| format!("{}[{}]", s.group, s.n))
                .collect::<Vec<_>>()
                .join("+");
            let th = state
                .map(|s| sig6(s.correlation(&e.a, &e.b)))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<8} {:<22} {:>12} {:>12} {:>12} {:>10}",
                e.pair_id,
                slots,
                th,
                sig6(e.estimate.value),
                sig6(e.estimate.sigma),
                e.counts.total()
            );
        }
        let ev = &self.evaluation;
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<8} {:>12} {:>12} {:>12} {:>12} {:>12}",
            "", "S_theory", "S_measured", "sigma_S", "bound", "sigmas"
        );
        let _ = writeln!(
            out,
            "{:<8} {:>12} {:>12} {:>12} {:>12} {:>12}",
            "S",
            theory.map(|t| sig6(t.s)).unwrap_or_else(|| "-".into()),
            sig6(ev.s),
            ev.sigma_s.map(sig6).unwrap_or_else(|| "-".into()),
            sig6(ev.bound),
            ev.significance.map(sig6).unwrap_or_else(|| "-".into()),
        );
        out
    }
}
