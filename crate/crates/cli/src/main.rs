//! Command-line front end: run campaigns, compare operator models and emit
//! plot data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use chromatomo::analysis::{compare_models, run_campaign, CampaignSummary, ExperimentConfig, Histogram};
use chromatomo::presets::{preset, Band, PRESET_NAMES};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chromatomo", version, about = "Tomography through dispersive wave plates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one campaign and write runs.csv, summary.json and histogram data.
    Simulate(RunArgs),
    /// Reconstruct the same counts with standard and fuzzy operators.
    Compare(RunArgs),
    /// Turn campaign directories into histogram CSVs and an SVG overlay.
    Plot(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON file with an experiment configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset (see the README for the list).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Use 10,000 runs instead of the reduced preset default.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    n_exp: Option<usize>,
    #[arg(long)]
    n_tot: Option<u64>,
}

#[derive(Args)]
struct PlotArgs {
    /// Campaign output directories.
    #[arg(required = true)]
    campaigns: Vec<PathBuf>,
    #[arg(long, default_value = "plot")]
    out: PathBuf,
}

/// Exit status 2 for bad input, 3 for I/O failures.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(error: anyhow::Error) -> Failure {
    Failure { code: 2, error }
}

fn io(error: anyhow::Error) -> Failure {
    Failure { code: 3, error }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Compare(a) => compare(&a),
        Command::Plot(a) => plot(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn resolve(args: &RunArgs) -> Result<(ExperimentConfig, Option<Band>), Failure> {
    let (mut config, band) = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))
                .map_err(usage)?;
            (ExperimentConfig::from_json(&text).map_err(|e| usage(e.into()))?, None)
        }
        (None, Some(name)) => {
            let p = preset(name, args.full).ok_or_else(|| {
                usage(anyhow!("unknown preset `{name}`; valid presets: {}", PRESET_NAMES.join(", ")))
            })?;
            (p.config, Some(p.band))
        }
        (None, None) => (ExperimentConfig::default(), None),
    };
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(n) = args.n_exp {
        config.n_exp = n;
    }
    if let Some(n) = args.n_tot {
        config.n_tot = n;
    }
    config.validate().map_err(|e| usage(e.into()))?;
    if let Some(j) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| usage(anyhow!("cannot size worker pool: {e}")))?;
    }
    Ok((config, band))
}

fn band_line(band: Option<Band>, label: &str, value: f64) -> Option<String> {
    match band {
        Some(b @ (Band::Loss { .. } | Band::Ratio { .. })) => Some(format!(
            "{label} {value:.4} {} band {b:?}",
            if b.contains(value) { "inside" } else { "outside" }
        )),
        _ => None,
    }
}

fn print_summary(s: &CampaignSummary) {
    println!(
        "{} [{:?} reconstruction] L = {:.4} +- {:.4}, Eff = {:.4} +- {:.4}, predicted L = {:.4}, runs {} ({} converged)",
        s.protocol,
        s.reconstruction_model,
        s.loss,
        s.loss_stderr,
        s.efficiency,
        s.efficiency_stderr,
        s.predicted_loss,
        s.n_runs,
        s.converged_runs
    );
}

fn simulate(args: &RunArgs) -> Result<(), Failure> {
    let (config, band) = resolve(args)?;
    let result = run_campaign(&config).map_err(|e| usage(e.into()))?;
    result
        .write_to_dir(&args.out)
        .with_context(|| format!("cannot write to {}", args.out.display()))
        .map_err(io)?;
    print_summary(&result.summary);
    let s = &result.summary;
    for line in [band_line(band, "L", s.loss), band_line(band, "predicted L", s.predicted_loss)].into_iter().flatten() {
        println!("{line}");
    }
    Ok(())
}

fn compare(args: &RunArgs) -> Result<(), Failure> {
    let (config, band) = resolve(args)?;
    let cmp = compare_models(&config).map_err(|e| usage(e.into()))?;
    cmp.write_to_dir(&args.out)
        .with_context(|| format!("cannot write to {}", args.out.display()))
        .map_err(io)?;
    print_summary(&cmp.standard.summary);
    print_summary(&cmp.fuzzy.summary);
    println!("loss ratio standard/fuzzy = {:.1}, paired counts: {}", cmp.ratio, cmp.paired);
    if let Some(line) = band_line(band, "ratio", cmp.ratio) {
        println!("{line}");
    }
    Ok(())
}

struct Curve {
    label: String,
    delta_lambda_nm: f64,
    histogram: Histogram,
}

fn load_campaign(dir: &Path) -> Result<Curve, Failure> {
    let runs = fs::read_to_string(dir.join("runs.csv"))
        .with_context(|| format!("missing runs.csv in {}", dir.display()))
        .map_err(usage)?;
    if runs.lines().filter(|l| !l.trim().is_empty()).count() < 2 {
        return Err(usage(anyhow!("{} has no runs", dir.join("runs.csv").display())));
    }
    let summary: CampaignSummary = fs::read_to_string(dir.join("summary.json"))
        .with_context(|| format!("missing summary.json in {}", dir.display()))
        .and_then(|t| serde_json::from_str(&t).context("unreadable summary.json"))
        .map_err(usage)?;
    let file = fs::File::open(dir.join("histogram.csv"))
        .with_context(|| format!("missing histogram.csv in {}", dir.display()))
        .map_err(usage)?;
    let histogram = Histogram::read_csv(file).map_err(|e| usage(e.into()))?;
    if histogram.density.is_empty() {
        return Err(usage(anyhow!("{} has an empty histogram", dir.display())));
    }
    let dl = summary.config.delta_lambda_nm;
    Ok(Curve { label: format!("{dl} nm"), delta_lambda_nm: dl, histogram })
}

const COLORS: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

/// Density curves as SVG polylines on shared axes.
fn render_svg(curves: &[Curve]) -> String {
    let (w, h, m) = (640.0, 420.0, 50.0);
    let x_max = curves.iter().filter_map(|c| c.histogram.edges.last().copied()).fold(0.0, f64::max);
    let y_max = curves.iter().map(|c| c.histogram.mode_height()).fold(0.0, f64::max);
    let sx = |x: f64| m + (w - 2.0 * m) * x / x_max;
    let sy = |y: f64| h - m - (h - 2.0 * m) * y / y_max;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{m} {t} V{b} H{r}" fill="none" stroke="black"/>"#,
        t = m,
        b = h - m,
        r = w - m
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">1 - F (max {x_max:.3e})</text>"#, w / 2.0, h - 15.0);
    let _ = writeln!(svg, r#"<text x="15" y="{}" font-size="12" transform="rotate(-90 15 {})">density</text>"#, h / 2.0, h / 2.0);
    for (i, c) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = c
            .histogram
            .density
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let x = (c.histogram.edges[k] + c.histogram.edges[k + 1]) / 2.0;
                format!("{:.2},{:.2}", sx(x), sy(*d))
            })
            .collect();
        let _ = writeln!(svg, r#"<polyline class="curve" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
            w - m - 80.0,
            m + 16.0 * (i as f64 + 1.0),
            c.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn plot(args: &PlotArgs) -> Result<(), Failure> {
    let mut curves = args.campaigns.iter().map(|d| load_campaign(d)).collect::<Result<Vec<_>, _>>()?;
    curves.sort_by(|a, b| a.delta_lambda_nm.total_cmp(&b.delta_lambda_nm));
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))
        .map_err(io)?;
    let mut used = std::collections::HashSet::new();
    for (i, c) in curves.iter().enumerate() {
        let mut name = format!("histogram_{}nm.csv", c.delta_lambda_nm);
        if !used.insert(name.clone()) {
            name = format!("histogram_{}nm_{i}.csv", c.delta_lambda_nm);
        }
        let file = fs::File::create(args.out.join(&name)).context("cannot create histogram file").map_err(io)?;
        c.histogram.write_csv(file).map_err(|e| io(e.into()))?;
        println!("{}: mode height {:.4e}", c.label, c.histogram.mode_height());
    }
    fs::write(args.out.join("density.svg"), render_svg(&curves))
        .context("cannot write density.svg")
        .map_err(io)?;
    println!("wrote {} curve(s) to {}", curves.len(), args.out.join("density.svg").display());
    Ok(())
}
