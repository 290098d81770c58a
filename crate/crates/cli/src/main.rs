//! Command-line front end for the rotated odometer analysis library.

use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rotodom_core::{
    analyze, export_dot, flow_spec, renorm_sequence, report_diagram, report_json,
    slope_permutation, survey, survey_csv, vertical_permutation, AnalysisOptions, AnalysisReport,
    CoreError, Dyadic, NConvention, Permutation, RotatedOdometer, SeedChoice, SurveyOptions,
};

#[derive(Parser)]
#[command(name = "rotodom", version, about = "Exact analysis of rotated odometers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Geq,
    Strict,
}

impl From<ConventionArg> for NConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Geq => NConvention::Geq,
            ConventionArg::Strict => NConvention::Strict,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SeedArg {
    Ones,
    Telescoped,
}

impl From<SeedArg> for SeedChoice {
    fn from(s: SeedArg) -> Self {
        match s {
            SeedArg::Ones => SeedChoice::Ones,
            SeedArg::Telescoped => SeedChoice::Telescoped,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Dot,
    Csv,
}

#[derive(Args)]
struct SystemArgs {
    /// Number of rotated subintervals.
    #[arg(long)]
    q: usize,
    /// Permutation: cycle notation like "(012)" or an image list "1,2,0".
    #[arg(long)]
    perm: String,
    /// How the carry resolution exponent N is derived from q.
    #[arg(long, value_enum, default_value = "geq")]
    n_convention: ConventionArg,
}

impl SystemArgs {
    fn system(&self) -> Result<RotatedOdometer, CoreError> {
        let perm = Permutation::parse(&self.perm, self.q)?;
        RotatedOdometer::with_convention(self.q, perm, self.n_convention.into())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Full report: renormalization, spectra, measures, coding checks.
    Analyze {
        #[command(flatten)]
        sys: SystemArgs,
        /// Dyadic divisor scan bound (divisors 2^1 .. 2^mod_max).
        #[arg(long, default_value_t = 20)]
        mod_max: u32,
        /// Height seed for the divisor scan.
        #[arg(long, value_enum, default_value = "ones")]
        seed: SeedArg,
        /// Diagram depth used for coding checks.
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
    /// Exact orbit of a point under F, with coding letters.
    Orbit {
        #[command(flatten)]
        sys: SystemArgs,
        /// Number of steps to iterate.
        #[arg(long, default_value_t = 32)]
        steps: usize,
        /// Start point in the exact form "num/(q*2^k)"; defaults to 0.
        #[arg(long)]
        x: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
    /// Per-level permutations, return words, and count matrices.
    Substitution {
        #[command(flatten)]
        sys: SystemArgs,
        /// Print levels 1..=levels (periodic extension past the stored data).
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
    /// Ordered diagram of the renormalization, DOT or JSON.
    Diagram {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Keep only the vertices that carry the aperiodic part.
        #[arg(long)]
        restricted: bool,
        #[arg(long, value_enum, default_value = "dot")]
        format: FormatArg,
    },
    /// Spectral report: char poly, Perron data, measures, divisor scans.
    Spectrum {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 20)]
        mod_max: u32,
        #[arg(long, value_enum, default_value = "ones")]
        seed: SeedArg,
        /// Track a single letter in the divisor scan.
        #[arg(long)]
        letter: Option<u8>,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
    /// Slope-to-permutation dictionary for the staircase surface flows.
    Surface {
        #[arg(long)]
        q: usize,
        /// Slope numerator partner: the flow has slope q/p.
        #[arg(long)]
        p: usize,
        /// Optional explicit horizontal permutation to conjugate.
        #[arg(long)]
        perm: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
    /// One classification row per permutation of q symbols.
    Survey {
        #[arg(long)]
        q: usize,
        #[arg(long, value_enum, default_value = "geq")]
        n_convention: ConventionArg,
        /// Dyadic scan bound per row.
        #[arg(long, default_value_t = 8)]
        mod_max: u32,
        #[arg(long, value_enum, default_value = "ones")]
        seed: SeedArg,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CoreError::Capacity { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CoreError> {
    match cli.command {
        Command::Analyze { sys, mod_max, seed, depth, format } => {
            let options = AnalysisOptions {
                convention: sys.n_convention.into(),
                mod_max,
                seed: seed.into(),
                depth,
                ..Default::default()
            };
            let report = analyze(sys.q, &sys.perm, &options)?;
            match format {
                FormatArg::Json => println!("{}", report_json(&report)),
                _ => print_report_text(&report),
            }
            Ok(())
        }
        Command::Orbit { sys, steps, x, format } => {
            let system = sys.system()?;
            let start = match x {
                Some(text) => Dyadic::from_str(&text)?,
                None => Dyadic::zero(sys.q as u64),
            };
            let orbit = system.orbit_itinerary(start, steps)?;
            match format {
                FormatArg::Json => {
                    println!("{}", serde_json::to_string_pretty(&orbit).expect("serializes"))
                }
                _ => {
                    println!("itinerary: {}", orbit.word());
                    for (t, p) in orbit.points.iter().enumerate() {
                        println!("{t:4}  {p}");
                    }
                }
            }
            Ok(())
        }
        Command::Substitution { sys, levels, format } => {
            let system = sys.system()?;
            let seq = renorm_sequence(&system)?;
            let max_level = levels.unwrap_or(seq.preperiod + seq.period);
            if format == FormatArg::Json {
                let shown: Vec<_> = (1..=max_level).map(|m| seq.record_at(m)).collect();
                println!("{}", serde_json::to_string_pretty(&shown).expect("serializes"));
                return Ok(());
            }
            println!(
                "q = {}, N = {}, preperiod = {}, period = {}",
                seq.q, seq.n_exp, seq.preperiod, seq.period
            );
            for m in 1..=max_level {
                let r = seq.record_at(m);
                println!("level {m}: perm {}", r.perm.cycle_string());
                for i in 0..seq.q {
                    println!("  {i} -> {}", r.chi.word_string(i));
                }
                println!(
                    "  covering: {} ({} of {} cells unvisited)",
                    r.covering,
                    r.unvisited_cells.len(),
                    seq.full_cell_count()
                );
                println!("  matrix:\n{}", indent(&r.matrix.to_string(), "    "));
            }
            Ok(())
        }
        Command::Diagram { sys, depth, restricted, format } => {
            let options = AnalysisOptions {
                convention: sys.n_convention.into(),
                depth,
                ..Default::default()
            };
            let diagram = report_diagram(sys.q, &sys.perm, &options, restricted)?;
            match format {
                FormatArg::Json => {
                    println!("{}", serde_json::to_string_pretty(&diagram).expect("serializes"))
                }
                _ => print!("{}", export_dot(&diagram)),
            }
            Ok(())
        }
        Command::Spectrum { sys, mod_max, seed, letter, format } => {
            let system = sys.system()?;
            let seq = renorm_sequence(&system)?;
            let tele = rotodom_core::telescope(&seq);
            let perron = rotodom_core::perron_data(&tele.matrix);
            let measures = rotodom_core::measure_report(&seq);
            let alphabet = rotodom_core::minimal_alphabet(&seq);
            let scan =
                rotodom_core::dyadic_scan(&seq, mod_max, &alphabet, seed.into(), letter)?;
            let entropy =
                rotodom_core::entropy_bound(system.q(), system.convention(), 6);
            if format == FormatArg::Json {
                let doc = serde_json::json!({
                    "telescoped_matrix": tele.matrix,
                    "perron": perron,
                    "measures": measures,
                    "minimal_alphabet": alphabet,
                    "dyadic_scan": scan,
                    "entropy": entropy,
                });
                println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
                return Ok(());
            }
            println!("char poly: {}", perron.char_poly_display);
            println!("spectral radius: {:.12} (residual {:.3e})", perron.radius, perron.residual);
            println!("measures: {}", measures.count());
            for c in &measures.candidates {
                println!(
                    "  block {:?}  radius {:.9}  eigenvector {:?}",
                    c.block, c.radius, c.left_eigenvector
                );
            }
            println!("minimal alphabet: {:?}", alphabet);
            match scan.first_failure {
                None => println!("dyadic scan: divisible through 2^{mod_max}"),
                Some(m) => println!("dyadic scan: fails at 2^{m}"),
            }
            for p in &entropy {
                println!(
                    "entropy bound k={}: {} subwords at scale 2^-{} -> {:.6e}",
                    p.k, p.subwords, p.scale_log2, p.value
                );
            }
            Ok(())
        }
        Command::Surface { q, p, perm, format } => {
            let horizontal = match &perm {
                Some(text) => Permutation::parse(text, q)?,
                None => slope_permutation(q, p)?,
            };
            if perm.is_none() && p < q {
                // Slope picture only; the vertical conjugate needs p >= q.
                let h = horizontal.cycle_string();
                if format == FormatArg::Json {
                    println!("{}", serde_json::json!({ "q": q, "p": p, "horizontal": h }));
                } else {
                    println!("horizontal: {h}");
                }
                return Ok(());
            }
            let vertical = vertical_permutation(q, &horizontal, p)?;
            if format == FormatArg::Json {
                let spec = flow_spec(q, p)?;
                println!("{}", serde_json::to_string_pretty(&spec).expect("serializes"));
            } else {
                println!("horizontal: {}", horizontal.cycle_string());
                println!("vertical:   {}", vertical.cycle_string());
            }
            Ok(())
        }
        Command::Survey { q, n_convention, mod_max, seed, format } => {
            let options = SurveyOptions {
                convention: n_convention.into(),
                mod_max,
                seed: seed.into(),
            };
            let rows = survey(q, &options)?;
            match format {
                FormatArg::Json => {
                    println!("{}", serde_json::to_string_pretty(&rows).expect("serializes"))
                }
                _ => print!("{}", survey_csv(&rows)),
            }
            Ok(())
        }
    }
}

fn print_report_text(r: &AnalysisReport) {
    println!(
        "system: q = {}, perm = {}, N = {} ({:?} convention){}",
        r.input.q,
        r.input.perm_cycles,
        r.input.n_exp,
        r.input.n_convention,
        if r.input.degenerate_power_of_two { "  [q = 2^n degenerate]" } else { "" }
    );
    println!("renormalization: preperiod {}, period {}", r.preperiod, r.period);
    for l in &r.levels {
        println!("  level {}: perm {}  covering = {}", l.level, l.perm, l.covering);
        for (i, w) in l.words.iter().enumerate() {
            println!("    {i} -> {w}");
        }
    }
    println!(
        "periodic region: {:?} ({} of {} level-1 cells)",
        r.periodic_class, r.periodic_cells_level1.0, r.periodic_cells_level1.1
    );
    println!("lebesgue ergodic: {}", r.ergodic);
    println!("char poly: {}", r.perron.char_poly_display);
    println!("spectral radius: {:.12}", r.perron.radius);
    println!("measures: {}", r.measures.count());
    println!("minimal alphabet: {:?}", r.minimal_alphabet);
    let scan_line = |scan: &rotodom_core::DyadicScan| match scan.first_failure {
        None => "divisible".to_string(),
        Some(m) => format!("fails at 2^{m}"),
    };
    println!("dyadic scan (full alphabet): {}", scan_line(&r.dyadic_full));
    println!("dyadic scan (minimal alphabet): {}", scan_line(&r.dyadic_minimal));
    if let Some(prefix) = &r.fixed_point_prefix {
        println!("fixed point prefix: {prefix}");
    } else {
        println!("fixed point prefix: (stalled: finite limit word)");
    }
    if let Some(c) = &r.coding {
        println!("coding check ({} steps): {}", c.steps, if c.ok() { "ok" } else { "MISMATCH" });
    }
    if let Some(ms) = r.elapsed_ms {
        println!("elapsed: {ms:.1} ms");
    }
}

fn indent(text: &str, pad: &str) -> String {
    text.lines().map(|l| format!("{pad}{l}")).collect::<Vec<_>>().join("\n")
}
