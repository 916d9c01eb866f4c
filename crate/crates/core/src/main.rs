use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bilinear_rank::design::{assemble_design, BlockPartition, ConfigLabel, DesignConfig, Preset};
use bilinear_rank::experiments::{compare, ModificationProcedure, RefinementProcedure};
use bilinear_rank::io;
use bilinear_rank::matrix::svd;
use bilinear_rank::rank::{detect_plateaus, sweep_spectrum, ToleranceGrid};
use bilinear_rank::sectors::{build_sector_scheme, dominant_sector, nullspace_basis, sector_weights, SectorMode};
use bilinear_rank::{Error, Result};

/// Overrides the directory used when `--out` is omitted.
const OUT_DIR_ENV: &str = "BILINEAR_RANK_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "bilinear-rank",
    version,
    about = "Rank plateaus and nullspace sectors of bilinear design matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample operator and state families and write a bundle.
    Generate {
        /// generic | block-restricted | block-perturbed:<eps> | mixed:<dim>
        #[arg(long, value_parser = parse_preset)]
        preset: Preset,
        #[arg(long, value_parser = parse_config)]
        config: ConfigLabel,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Blocks as `0,1|2,3`; defaults to two equal halves.
        #[arg(long)]
        partition: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the rank of a bundle's design over a tolerance grid.
    Sweep {
        #[arg(long = "in")]
        input: PathBuf,
        /// `start:stop:count`, log-spaced and increasing.
        #[arg(long, default_value = "1e-16:1e-2:29")]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the plateaus of a profile table.
    Plateaus {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Split the numerical nullspace into block sectors.
    Sectors {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Scheme::Two)]
        scheme: Scheme,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Contrast refinements with modifications of the families.
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
        /// Seed for the modified families; defaults to the bundle seed plus one.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write staircase, sector and comparison figures here.
        #[arg(long)]
        figures: Option<PathBuf>,
    },
    /// Render SVG figures from profile tables or a report.
    Plot {
        /// One or more profile tables to overlay as staircases.
        #[arg(long, num_args = 1.., conflicts_with = "report", required_unless_present = "report")]
        profile: Vec<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Figure drawn from a report.
        #[arg(long, value_enum, default_value_t = ReportFigure::Comparison, requires = "report")]
        figure: ReportFigure,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Two,
    Four,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFigure {
    Comparison,
    Staircase,
    Sectors,
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_config(s: &str) -> std::result::Result<ConfigLabel, String> {
    match s {
        "A" | "B" | "C" => s.parse().map_err(|e: Error| e.to_string()),
        _ => Err(format!("expected A, B or C, got {s:?}")),
    }
}

fn out_path(out: Option<PathBuf>, default_name: &str) -> PathBuf {
    out.unwrap_or_else(|| {
        let dir = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from);
        dir.join(default_name)
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    io::write_atomic(path, text.as_bytes())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            preset,
            config,
            seed,
            partition,
            out,
        } => {
            let config = DesignConfig::from_label(config)?;
            let partition = match partition {
                Some(p) => BlockPartition::parse(&p, config.d)?,
                None => BlockPartition::default_for(config.d),
            };
            let bundle = preset.sample(config, &partition, seed)?;
            let path = out_path(out, "bundle.json");
            io::save_bundle(&bundle, &path)?;
            println!(
                "wrote {} ({} operators, {} states)",
                path.display(),
                bundle.operators.len(),
                bundle.states.len()
            );
        }
        Command::Sweep { input, grid, out } => {
            let grid = ToleranceGrid::parse(&grid)?;
            let bundle = io::load_bundle(&input)?;
            let spectrum = svd(&assemble_design(&bundle)?)?;
            let profile = sweep_spectrum(&spectrum, &grid, bundle.ambient_dim(), &bundle.preset_label)?;
            let path = out_path(out, "profile.csv");
            io::export_profile(&profile, &path)?;
            println!(
                "wrote {} ({} tolerances, max rank {})",
                path.display(),
                grid.len(),
                profile.max_rank()
            );
        }
        Command::Plateaus { input } => {
            let profile = io::read_profile(&input)?;
            let taus = profile.grid.values();
            for p in detect_plateaus(&profile) {
                println!(
                    "rank={} tol_start={:e} tol_end={:e} points={} span_decades={:.3}",
                    p.rank_value,
                    taus[p.start_index],
                    taus[p.end_index],
                    p.len(),
                    p.span_decades
                );
            }
        }
        Command::Sectors {
            input,
            tol,
            scheme,
            out,
        } => {
            let bundle = io::load_bundle(&input)?;
            let mode = match scheme {
                Scheme::Two => SectorMode::TwoSector,
                Scheme::Four => SectorMode::FourSector,
            };
            let spectrum = svd(&assemble_design(&bundle)?)?;
            let basis = nullspace_basis(&spectrum, tol)?;
            let scheme = build_sector_scheme(&bundle.partition, bundle.config.d, mode)?;
            let weights = sector_weights(&basis, &scheme)?;
            let path = out_path(out, "sectors.csv");
            io::export_sectors(&weights, &path)?;
            match &weights.weights {
                None => println!("nullspace dim 0 at tol {tol:e}: weights undefined"),
                Some(ws) => {
                    println!("nullspace dim {} at tol {tol:e}", weights.nullspace_dim);
                    for w in ws {
                        println!("{} {:.12}", w.sector, w.weight);
                    }
                    let top = dominant_sector(&weights)?;
                    println!("dominant {}{}", top.sector, if top.tie { " (tie)" } else { "" });
                }
            }
            println!("wrote {}", path.display());
        }
        Command::Compare {
            input,
            seed,
            out,
            figures,
        } => {
            let bundle = io::load_bundle(&input)?;
            let seed = seed.unwrap_or(bundle.seed.wrapping_add(1));
            let report = compare(
                &bundle,
                &RefinementProcedure::standard_set(),
                &ModificationProcedure::standard_set(seed),
            )?;
            let path = out_path(out, "report.json");
            io::export_report(&report, &path)?;
            println!(
                "plateaus preserved under refinement: {}; max rank after modification: {}",
                report.plateaus_preserved, report.max_rank_after_modification
            );
            println!("wrote {}", path.display());
            if let Some(dir) = figures {
                std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
                    path: dir.display().to_string(),
                    source: e,
                })?;
                write_text(
                    &dir.join("staircase.svg"),
                    &io::staircase_svg(&[&report.baseline_profile], &report.preset_label),
                )?;
                write_text(
                    &dir.join("sectors.svg"),
                    &io::sector_bars_svg(&report.sector_summary, &report.preset_label),
                )?;
                write_text(
                    &dir.join("comparison.svg"),
                    &io::comparison_bars_svg(&report, &report.preset_label),
                )?;
                println!("wrote figures to {}", dir.display());
            }
        }
        Command::Plot {
            profile,
            report,
            figure,
            out,
        } => {
            let svg = match report {
                Some(r) => {
                    let report = io::read_report(&r)?;
                    let title = report.preset_label.clone();
                    match figure {
                        ReportFigure::Comparison => io::comparison_bars_svg(&report, &title),
                        ReportFigure::Sectors => io::sector_bars_svg(&report.sector_summary, &title),
                        ReportFigure::Staircase => {
                            let mut all = vec![&report.baseline_profile];
                            all.extend(report.modification_results.iter().map(|m| &m.profile));
                            io::staircase_svg(&all, &title)
                        }
                    }
                }
                None => {
                    let profiles = profile
                        .iter()
                        .map(|p| {
                            io::read_profile(p).map(|mut prof| {
                                prof.source_label = p.display().to_string();
                                prof
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    io::staircase_svg(&profiles.iter().collect::<Vec<_>>(), "numerical rank vs tolerance")
                }
            };
            let path = out_path(out, "figure.svg");
            write_text(&path, &svg)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
