//! Aggregated analysis reports, permutation surveys, and export formats.

use itertools::Itertools;
use num_bigint::BigUint;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::{periodic_region_with_limit, DEFAULT_CELL_LIMIT};
use crate::diagram::{
    build_diagram, coding_check, fixed_point_prefix, heights, minimal_alphabet, telescope,
    CodingCheck, OrderedDiagram,
};
use crate::error::{CoreError, Result};
use crate::matrix::IntegerMatrix;
use crate::odometer::{letters_to_string, NConvention, RotatedOdometer};
use crate::perm::Permutation;
use crate::renorm::{covering_status, renorm_sequence, PeriodicClass, RenormSeq};
use crate::spectra::{
    dyadic_scan, entropy_bound, lebesgue_ergodic, measure_report, perron_data, DyadicScan,
    EntropyPoint, MeasureReport, PerronData, SeedChoice,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub convention: NConvention,
    /// Depth of the diagrams included in the report.
    pub depth: usize,
    /// Dyadic scan bound: divisors 2^1 .. 2^mod_max.
    pub mod_max: u32,
    pub seed: SeedChoice,
    /// Length of the reported fixed-point prefix.
    pub prefix_len: usize,
    /// Steps of the three-way coding comparison.
    pub coding_steps: usize,
    /// Heights reported through this level.
    pub height_levels: usize,
    pub entropy_terms: u32,
    pub cell_limit: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            convention: NConvention::Geq,
            depth: 3,
            mod_max: 20,
            seed: SeedChoice::Ones,
            prefix_len: 64,
            coding_steps: 256,
            height_levels: 6,
            entropy_terms: 6,
            cell_limit: DEFAULT_CELL_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputEcho {
    pub q: usize,
    pub perm_cycles: String,
    pub perm_images: Vec<usize>,
    pub n_convention: NConvention,
    pub n_exp: u32,
    pub degenerate_power_of_two: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: usize,
    pub perm: String,
    pub words: Vec<String>,
    pub matrix: IntegerMatrix,
    pub return_times: Vec<usize>,
    pub covering: bool,
    pub unvisited_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TelescopeSummary {
    pub matrix: IntegerMatrix,
    pub seed: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub input: InputEcho,
    pub preperiod: usize,
    pub period: usize,
    pub levels: Vec<LevelSummary>,
    pub periodic_class: PeriodicClass,
    /// Fraction of level-1 cells that are periodic, as (count, total).
    pub periodic_cells_level1: (usize, usize),
    pub minimal_alphabet: Vec<u8>,
    pub telescoped: TelescopeSummary,
    pub perron: PerronData,
    pub measures: MeasureReport,
    pub ergodic: bool,
    pub dyadic_full: DyadicScan,
    pub dyadic_minimal: DyadicScan,
    pub entropy: Vec<EntropyPoint>,
    pub heights: Vec<Vec<String>>,
    pub fixed_point_prefix: Option<String>,
    pub fixed_point_stalled: bool,
    pub coding: Option<CodingCheck>,
    /// Wall-clock milliseconds; excluded from serialization so reports stay
    /// byte-identical across runs.
    #[serde(skip)]
    pub elapsed_ms: Option<f64>,
}

fn big_strings(v: &[BigUint]) -> Vec<String> {
    v.iter().map(BigUint::to_string).collect()
}

pub fn analyze(q: usize, perm_text: &str, options: &AnalysisOptions) -> Result<AnalysisReport> {
    let perm = Permutation::parse(perm_text, q)?;
    let sys = RotatedOdometer::with_convention(q, perm, options.convention)?;
    analyze_system(&sys, options)
}

pub fn analyze_system(sys: &RotatedOdometer, options: &AnalysisOptions) -> Result<AnalysisReport> {
    let start = std::time::Instant::now();
    let seq = renorm_sequence(sys)?;
    let levels = seq
        .records
        .iter()
        .map(|r| LevelSummary {
            level: r.level,
            perm: r.perm.cycle_string(),
            words: (0..seq.q).map(|i| r.chi.word_string(i)).collect(),
            matrix: r.matrix.clone(),
            return_times: r.return_times.clone(),
            covering: r.covering,
            unvisited_count: r.unvisited_cells.len(),
        })
        .collect();
    let region = periodic_region_with_limit(sys, 1, options.cell_limit)?;
    let alphabet = minimal_alphabet(&seq);
    let tele = telescope(&seq);
    let perron = perron_data(&tele.matrix);
    let measures = measure_report(&seq);
    let full_alphabet: Vec<u8> = (0..seq.q as u8).collect();
    let dyadic_full = dyadic_scan(&seq, options.mod_max, &full_alphabet, options.seed, None)?;
    let dyadic_minimal = dyadic_scan(&seq, options.mod_max, &alphabet, options.seed, None)?;
    let height_rows: Vec<Vec<String>> = (1..=options.height_levels.max(1))
        .map(|n| big_strings(&heights(&seq, n)))
        .collect();
    let (prefix, stalled) = match fixed_point_prefix(&seq, options.prefix_len) {
        Ok(w) => (Some(letters_to_string(&w)), false),
        Err(CoreError::FixedPointStalled { .. }) => (None, true),
        Err(e) => return Err(e),
    };
    let coding = if stalled {
        None
    } else {
        Some(coding_check(sys, options.coding_steps)?)
    };
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        input: InputEcho {
            q: sys.q(),
            perm_cycles: sys.perm().cycle_string(),
            perm_images: sys.perm().images().to_vec(),
            n_convention: sys.convention(),
            n_exp: sys.n_exp(),
            degenerate_power_of_two: sys.is_power_of_two_degenerate(),
        },
        preperiod: seq.preperiod,
        period: seq.period,
        levels,
        periodic_class: covering_status(&seq),
        periodic_cells_level1: (region.periodic_cells, region.cell_count),
        minimal_alphabet: alphabet,
        telescoped: TelescopeSummary { matrix: tele.matrix, seed: big_strings(&tele.seed) },
        perron,
        measures,
        ergodic: lebesgue_ergodic(&seq),
        dyadic_full,
        dyadic_minimal,
        entropy: entropy_bound(sys.q(), sys.convention(), options.entropy_terms),
        heights: height_rows,
        fixed_point_prefix: prefix,
        fixed_point_stalled: stalled,
        coding,
        elapsed_ms: Some(start.elapsed().as_secs_f64() * 1e3),
    })
}

pub fn report_json(report: &AnalysisReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// Named DOT export for a diagram (see [`OrderedDiagram::to_dot`]).
pub fn export_dot(diagram: &OrderedDiagram) -> String {
    diagram.to_dot()
}

/// One survey row: the classification data for a single permutation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurveyRow {
    pub perm: String,
    pub images: Vec<usize>,
    pub preperiod: usize,
    pub period: usize,
    pub periodic_class: PeriodicClass,
    pub ergodic: bool,
    pub measures: usize,
    pub minimal_letters: usize,
    pub dyadic_divisible: bool,
    pub dyadic_first_failure: Option<u32>,
    pub degenerate_power_of_two: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurveyOptions {
    pub convention: NConvention,
    /// Dyadic scan bound per row (kept modest: a survey touches q! systems).
    pub mod_max: u32,
    pub seed: SeedChoice,
}

impl Default for SurveyOptions {
    fn default() -> Self {
        SurveyOptions { convention: NConvention::Geq, mod_max: 8, seed: SeedChoice::Ones }
    }
}

fn survey_row(q: usize, images: Vec<usize>, options: &SurveyOptions) -> Result<SurveyRow> {
    let perm = Permutation::from_images(images)?;
    let sys = RotatedOdometer::with_convention(q, perm, options.convention)?;
    let seq = renorm_sequence(&sys)?;
    let alphabet = minimal_alphabet(&seq);
    let scan = dyadic_scan(&seq, options.mod_max, &alphabet, options.seed, None)?;
    Ok(SurveyRow {
        perm: sys.perm().cycle_string(),
        images: sys.perm().images().to_vec(),
        preperiod: seq.preperiod,
        period: seq.period,
        periodic_class: covering_status(&seq),
        ergodic: lebesgue_ergodic(&seq),
        measures: measure_report(&seq).count(),
        minimal_letters: alphabet.len(),
        dyadic_divisible: scan.all_divisible,
        dyadic_first_failure: scan.first_failure,
        degenerate_power_of_two: sys.is_power_of_two_degenerate(),
    })
}

fn all_image_lists(q: usize) -> Vec<Vec<usize>> {
    (0..q).permutations(q).collect()
}

/// Survey of every permutation of q symbols, rows sorted by image list.
/// Runs data-parallel when the `parallel` feature is enabled.
pub fn survey(q: usize, options: &SurveyOptions) -> Result<Vec<SurveyRow>> {
    let lists = all_image_lists(q);
    #[cfg(feature = "parallel")]
    let mut rows: Vec<SurveyRow> = lists
        .into_par_iter()
        .map(|images| survey_row(q, images, options))
        .collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let mut rows: Vec<SurveyRow> = lists
        .into_iter()
        .map(|images| survey_row(q, images, options))
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.images.cmp(&b.images));
    Ok(rows)
}

/// Single-threaded survey, independent of the feature flag; used by the
/// benchmarks to compare against the parallel path.
pub fn survey_sequential(q: usize, options: &SurveyOptions) -> Result<Vec<SurveyRow>> {
    let mut rows: Vec<SurveyRow> = all_image_lists(q)
        .into_iter()
        .map(|images| survey_row(q, images, options))
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.images.cmp(&b.images));
    Ok(rows)
}

pub const SURVEY_CSV_HEADER: &str =
    "perm,images,preperiod,period,periodic_class,ergodic,measures,minimal_letters,dyadic,degenerate";

pub fn survey_csv(rows: &[SurveyRow]) -> String {
    let mut out = String::from(SURVEY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let class = match r.periodic_class {
            PeriodicClass::Empty => "empty",
            PeriodicClass::Finite => "finite",
            PeriodicClass::Infinite => "infinite",
        };
        let dyadic = match r.dyadic_first_failure {
            None => "pass".to_string(),
            Some(m) => format!("fail@{m}"),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.perm,
            r.images.iter().map(ToString::to_string).join(" "),
            r.preperiod,
            r.period,
            class,
            r.ergodic,
            r.measures,
            r.minimal_letters,
            dyadic,
            r.degenerate_power_of_two,
        ));
    }
    out
}

/// Convenience wrapper building the report-level diagram.
pub fn report_diagram(
    q: usize,
    perm_text: &str,
    options: &AnalysisOptions,
    restricted: bool,
) -> Result<OrderedDiagram> {
    let perm = Permutation::parse(perm_text, q)?;
    let sys = RotatedOdometer::with_convention(q, perm, options.convention)?;
    let seq: RenormSeq = renorm_sequence(&sys)?;
    build_diagram(&seq, options.depth, restricted)
}
