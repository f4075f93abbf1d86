//! `mtri`: moment triangles, reconstruction, projection moments, orbit
//! tests and symmetry classification from the command line.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use moment_triangle::{
    generic_angle_schedule, intensities_from_column, invariant_triangle, orbits_equivalent,
    radon_moment_direct, reconstruct_image, report_to_json, table_to_json, triangle_from_json,
    triangle_to_json_with, AffineRecord, FrameTag, GroupWitness, MomentTable, PascalTriangle,
    PixelCloud, SymmetryOptions, SymmetryReport,
};
use mtri_harness::{
    cloud_to_csv, exit_code_for, load_image, metrics_to_csv, run_experiment, synth_corpus_with,
    AxisMode, ExperimentConfig, ExperimentMode, ImageFormat, ImageSource, YAxis,
};
use num_complex::Complex64;

/// Above this order, moments of raw pixel coordinates lose precision fast,
/// so coordinates are pre-normalized unless `--no-normalize` is given.
const NORMALIZE_ABOVE_ORDER: usize = 8;

#[derive(Parser)]
#[command(
    name = "mtri",
    version,
    about = "Moment triangles of discrete images: compute, invariantize, reconstruct, classify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Input image: PGM (P2/P5) raster or x,y,intensity CSV.
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Input format (pgm-ascii | pgm-binary | csv-points); inferred when omitted.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Moment / triangle order.
    #[arg(long, global = true)]
    order: Option<usize>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Numeric tolerance where the subcommand takes one.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Keep raw pixel coordinates even at high orders.
    #[arg(long, global = true)]
    no_normalize: bool,

    /// RNG seed for synthetic data.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Worker threads for batch commands; all cores when omitted.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Raster row direction: up maps pixel (col,row) to col + i(H-1-row).
    #[arg(long, global = true, default_value = "up")]
    y_axis: String,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the complex moment grid of an image (JSON).
    Moments,
    /// Compute the moment triangle, optionally invariantized (JSON).
    Triangle {
        /// Comma list of trans,scale,rotate, or "all".
        #[arg(long)]
        invariant: Option<String>,
    },
    /// Rebuild a pixel cloud from a triangle JSON (CSV).
    Reconstruct {
        /// Known pixel locations (x,y CSV); switches to the column solve.
        #[arg(long)]
        locations: Option<PathBuf>,
        /// Which moment column to solve from when locations are known.
        #[arg(long, default_value_t = 0)]
        column_l: usize,
    },
    /// Projection moments m_n(theta) of an image (CSV).
    Radon {
        /// Projection angle in radians; repeatable.
        #[arg(long)]
        theta: Vec<f64>,
        /// Append the deterministic generic schedule for row n.
        #[arg(long)]
        schedule: Option<usize>,
        /// Compute m_n for n = 0..=N at every angle.
        #[arg(long, default_value_t = 8)]
        moments_up_to: usize,
    },
    /// Decide whether two images differ by a group element.
    Equiv {
        /// translation | scaling | rotation
        #[arg(long)]
        group: String,
        a: PathBuf,
        b: PathBuf,
    },
    /// Symmetry analysis of one image.
    Symmetry {
        /// horizontal | axis | frs | elongation
        #[arg(long, default_value = "horizontal")]
        mode: String,
        /// Decision threshold: r for horizontal, degrees for axis,
        /// residual tolerance for frs/elongation.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Threshold-sweep classification over a labeled image directory (CSV).
    Classify {
        #[arg(long)]
        dir: PathBuf,
        /// labels CSV: filename,symmetric[,axis]
        #[arg(long)]
        labels: PathBuf,
        /// lo:hi:step
        #[arg(long)]
        sweep: String,
        /// horizontal | axis
        #[arg(long, default_value = "horizontal")]
        mode: String,
    },
    /// Generate a synthetic labeled corpus into a directory.
    Synth {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 40)]
        count: usize,
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        /// random | horizontal mirror axes for the symmetric half.
        #[arg(long, default_value = "random")]
        axis_mode: String,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(&cli) {
        eprintln!("error: {error:#}");
        std::process::exit(exit_code_for(&error));
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Moments => moments_command(cli),
        Command::Triangle { invariant } => triangle_command(cli, invariant.as_deref()),
        Command::Reconstruct {
            locations,
            column_l,
        } => reconstruct_command(cli, locations.as_deref(), *column_l),
        Command::Radon {
            theta,
            schedule,
            moments_up_to,
        } => radon_command(cli, theta, *schedule, *moments_up_to),
        Command::Equiv { group, a, b } => equiv_command(cli, group, a, b),
        Command::Symmetry { mode, threshold } => symmetry_command(cli, mode, *threshold),
        Command::Classify {
            dir,
            labels,
            sweep,
            mode,
        } => classify_command(cli, dir, labels, sweep, mode),
        Command::Synth {
            dir,
            count,
            jitter,
            axis_mode,
        } => synth_command(cli, dir, *count, *jitter, axis_mode),
    }
}

fn image_source(cli: &Cli) -> Result<ImageSource> {
    let path = cli
        .input
        .clone()
        .ok_or_else(|| anyhow!("--input is required for this command"))?;
    let mut source = ImageSource::new(path);
    if let Some(name) = &cli.format {
        source.format =
            Some(ImageFormat::parse(name).ok_or_else(|| anyhow!("unknown format {name:?}"))?);
    }
    source.y_axis = match cli.y_axis.as_str() {
        "up" => YAxis::Up,
        "down" => YAxis::Down,
        other => bail!("unknown y-axis {other:?} (expected up or down)"),
    };
    Ok(source)
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Applies the high-order conditioning rule: returns the cloud to compute
/// with and the record of the applied map, if any.
fn conditioned_cloud(
    cli: &Cli,
    cloud: &PixelCloud,
    order: usize,
) -> Result<(PixelCloud, Option<AffineRecord>)> {
    if order > NORMALIZE_ABOVE_ORDER && !cli.no_normalize {
        let (normalized, record) = cloud.normalized()?;
        Ok((normalized, Some(record)))
    } else {
        Ok((cloud.clone(), None))
    }
}

fn moments_command(cli: &Cli) -> Result<()> {
    let cloud = load_image(&image_source(cli)?)?;
    let order = cli.order.unwrap_or(8);
    let (cloud, record) = conditioned_cloud(cli, &cloud, order)?;
    let table = MomentTable::compute(&cloud, order)?;
    emit(cli, &table_to_json(&table, record.as_ref()))
}

fn parse_tags(list: &str) -> Result<Vec<FrameTag>> {
    if list == "all" {
        return Ok(FrameTag::ALL.to_vec());
    }
    list.split(',')
        .map(|name| {
            FrameTag::parse(name.trim())
                .ok_or_else(|| anyhow!("unknown group {name:?} (trans|scale|rotate|all)"))
        })
        .collect()
}

fn triangle_command(cli: &Cli, invariant: Option<&str>) -> Result<()> {
    let cloud = load_image(&image_source(cli)?)?;
    let order = cli.order.unwrap_or(8);
    let text = match invariant {
        None => {
            let (cloud, record) = conditioned_cloud(cli, &cloud, order)?;
            let table = MomentTable::compute(&cloud, order)?;
            let triangle = PascalTriangle::from_table(&table, order)?;
            triangle_to_json_with(&triangle, record.as_ref())
        }
        Some(list) => {
            let tags = parse_tags(list)?;
            let triangle = invariant_triangle(&cloud, order, &tags)?;
            triangle_to_json_with(&triangle, None)
        }
    };
    emit(cli, &text)
}

fn reconstruct_command(cli: &Cli, locations: Option<&Path>, column_l: usize) -> Result<()> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| anyhow!("--input must point at a triangle JSON"))?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (triangle, record) = triangle_from_json(&text)?;

    let cloud = match locations {
        None => reconstruct_image(&triangle)?,
        Some(csv_path) => {
            let csv = fs::read_to_string(csv_path)
                .with_context(|| format!("reading {}", csv_path.display()))?;
            let locations = mtri_harness::io::parse_locations_csv(&csv)?;
            let mut column = Vec::with_capacity(locations.len());
            for j in 0..locations.len() {
                if j + column_l > triangle.order() {
                    bail!(
                        "triangle order {} too small for {} locations with column l = {}",
                        triangle.order(),
                        locations.len(),
                        column_l
                    );
                }
                column.push(triangle.moment(j + column_l, j)?);
            }
            let solve = intensities_from_column(&locations, &column, column_l)?;
            if solve.ill_conditioned {
                eprintln!(
                    "warning: column solve condition estimate {:.3e} above bound",
                    solve.condition
                );
            }
            let scale = column.iter().map(|v| v.norm()).fold(1.0, f64::max);
            let pixels: Vec<(Complex64, f64)> = locations
                .iter()
                .zip(&solve.intensities)
                .map(|(&z, &rho)| {
                    let clamped = if rho < 0.0 && rho.abs() <= 1e-9 * scale {
                        0.0
                    } else {
                        rho
                    };
                    (z, clamped)
                })
                .collect();
            PixelCloud::new(pixels)?
        }
    };
    let restored = match record {
        Some(r) => r.restore_cloud(&cloud),
        None => cloud,
    };
    emit(cli, &cloud_to_csv(&restored))
}

fn radon_command(
    cli: &Cli,
    thetas: &[f64],
    schedule: Option<usize>,
    moments_up_to: usize,
) -> Result<()> {
    let cloud = load_image(&image_source(cli)?)?;
    let mut angles = thetas.to_vec();
    if let Some(n) = schedule {
        angles.extend(generic_angle_schedule(n));
    }
    if angles.is_empty() {
        bail!("no angles: pass --theta or --schedule");
    }
    let (cloud, record) = conditioned_cloud(cli, &cloud, moments_up_to)?;
    if record.is_some() {
        eprintln!(
            "note: coordinates were normalized for order {moments_up_to}; \
             pass --no-normalize for raw-coordinate moments"
        );
    }
    let mut out = String::from("theta,n,value\n");
    for &theta in &angles {
        for n in 0..=moments_up_to {
            let sample = radon_moment_direct(&cloud, theta, n);
            out.push_str(&format!(
                "{:.16e},{},{:.16e}\n",
                sample.theta, sample.order, sample.value
            ));
        }
    }
    emit(cli, &out)
}

fn equiv_command(cli: &Cli, group: &str, a: &Path, b: &Path) -> Result<()> {
    let tag = FrameTag::parse(group)
        .ok_or_else(|| anyhow!("unknown group {group:?} (translation|scaling|rotation)"))?;
    let mut source_a = image_source_for_path(cli, a)?;
    let mut source_b = image_source_for_path(cli, b)?;
    source_a.y_axis = parse_y_axis(&cli.y_axis)?;
    source_b.y_axis = source_a.y_axis;
    let cloud_a = load_image(&source_a)?;
    let cloud_b = load_image(&source_b)?;
    let tolerance = cli.tolerance.unwrap_or(1e-8);
    let verdict = orbits_equivalent(&cloud_a, &cloud_b, tag, tolerance)?;
    let mut text = format!("equivalent: {}\n", verdict.equivalent);
    match verdict.witness {
        Some(GroupWitness::Translation(z)) => text.push_str(&format!(
            "witness: translation {:.16e} + {:.16e}i\n",
            z.re, z.im
        )),
        Some(GroupWitness::Scaling(s)) => text.push_str(&format!("witness: scaling {s:.16e}\n")),
        Some(GroupWitness::Rotation(t)) => {
            text.push_str(&format!("witness: rotation {t:.16e} rad\n"))
        }
        None => {}
    }
    if verdict.used_fallback {
        text.push_str("fallback: direct search (degenerate or boundary frame)\n");
    }
    emit(cli, &text)
}

fn image_source_for_path(cli: &Cli, path: &Path) -> Result<ImageSource> {
    let mut source = ImageSource::new(path);
    if let Some(name) = &cli.format {
        source.format =
            Some(ImageFormat::parse(name).ok_or_else(|| anyhow!("unknown format {name:?}"))?);
    }
    Ok(source)
}

fn parse_y_axis(name: &str) -> Result<YAxis> {
    match name {
        "up" => Ok(YAxis::Up),
        "down" => Ok(YAxis::Down),
        other => bail!("unknown y-axis {other:?}"),
    }
}

fn symmetry_command(cli: &Cli, mode: &str, threshold: Option<f64>) -> Result<()> {
    let cloud = load_image(&image_source(cli)?)?;
    let mut options = SymmetryOptions {
        order: cli.order.unwrap_or(10),
        ..SymmetryOptions::default()
    };
    match mode {
        "axis" => options.axis_threshold = threshold.unwrap_or(4.0).to_radians(),
        "frs" => options.frs_tolerance = threshold.unwrap_or(1e-6),
        "elongation" => options.line_tolerance = threshold.unwrap_or(1e-9),
        "horizontal" => {}
        other => bail!("unknown mode {other:?} (horizontal|axis|frs|elongation)"),
    }
    let report = SymmetryReport::analyze(&cloud, &options)?;

    let mut text = String::new();
    match mode {
        "horizontal" => {
            let r = threshold.unwrap_or(0.07);
            let score = report
                .horizontal_score
                .ok_or_else(|| anyhow!("horizontal score undefined for this image"))?;
            text.push_str(&format!("score: {score:.16e}\n"));
            text.push_str(&format!("threshold: {r:.16e}\n"));
            text.push_str(&format!("symmetric: {}\n", score < r * r));
        }
        "axis" => {
            text.push_str(&format!(
                "angles: {:.16e} {:.16e} {:.16e}\n",
                report.axis_angles[0], report.axis_angles[1], report.axis_angles[2]
            ));
            text.push_str(&format!("verdict: {:?}\n", report.axis_verdict));
        }
        "frs" => {
            if report.frs_folds.is_empty() {
                text.push_str("folds: none\n");
            } else {
                for fold in &report.frs_folds {
                    text.push_str(&format!(
                        "fold: {} residual {:.16e}\n",
                        fold.fold, fold.residual
                    ));
                }
            }
        }
        "elongation" => {
            match report.elongation {
                Some(e) => text.push_str(&format!("elongation: {e:.16e}\n")),
                None => text.push_str("elongation: undefined\n"),
            }
            text.push_str(&format!("is_line: {}\n", report.is_line));
        }
        _ => unreachable!(),
    }
    if let Some(path) = &cli.out {
        fs::write(path, report_to_json(&report))
            .with_context(|| format!("writing {}", path.display()))?;
        print!("{text}");
        Ok(())
    } else {
        print!("{text}");
        Ok(())
    }
}

fn parse_sweep(range: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        bail!("sweep must be lo:hi:step, got {range:?}");
    }
    Ok((parts[0].parse()?, parts[1].parse()?, parts[2].parse()?))
}

fn parse_labels(text: &str) -> Result<Vec<(String, bool)>> {
    let mut labels = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            bail!("labels line {}: expected filename,symmetric", number + 1);
        }
        if number == 0 && fields[0] == "filename" {
            continue;
        }
        let symmetric = match fields[1] {
            "1" | "true" => true,
            "0" | "false" => false,
            other => bail!("labels line {}: bad flag {other:?}", number + 1),
        };
        labels.push((fields[0].to_string(), symmetric));
    }
    if labels.is_empty() {
        bail!("empty labels file");
    }
    Ok(labels)
}

fn classify_command(
    cli: &Cli,
    dir: &Path,
    labels_path: &Path,
    sweep: &str,
    mode: &str,
) -> Result<()> {
    let mode = match mode {
        "horizontal" => ExperimentMode::Horizontal,
        "axis" => ExperimentMode::Axis,
        other => bail!("unknown mode {other:?} (horizontal|axis)"),
    };
    let (lo, hi, step) = parse_sweep(sweep)?;
    let labels_text = fs::read_to_string(labels_path)
        .with_context(|| format!("reading {}", labels_path.display()))?;
    let labels = parse_labels(&labels_text)?;

    let mut corpus = Vec::with_capacity(labels.len());
    for (name, symmetric) in &labels {
        let mut source = ImageSource::new(dir.join(name));
        if let Some(fmt) = &cli.format {
            source.format =
                Some(ImageFormat::parse(fmt).ok_or_else(|| anyhow!("unknown format {fmt:?}"))?);
        }
        source.y_axis = parse_y_axis(&cli.y_axis)?;
        let cloud = load_image(&source).with_context(|| format!("labeled image {name}"))?;
        corpus.push((cloud, *symmetric));
    }

    let mut config = ExperimentConfig::new(lo, hi, step, mode);
    config.order = cli.order.unwrap_or(8);
    config.jobs = cli.jobs;
    let result = run_experiment(&config, &corpus)?;
    eprintln!(
        "best accuracy {:.4} at threshold {:.6}",
        result.best_accuracy, result.best_threshold
    );
    emit(cli, &metrics_to_csv(&result.rows))
}

fn synth_command(cli: &Cli, dir: &Path, count: usize, jitter: f64, axis_mode: &str) -> Result<()> {
    let mode = match axis_mode {
        "random" => AxisMode::Random,
        "horizontal" => AxisMode::Horizontal,
        other => bail!("unknown axis mode {other:?} (random|horizontal)"),
    };
    let corpus = synth_corpus_with(cli.seed, count, jitter, mode)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut labels = String::from("filename,symmetric,axis\n");
    for (index, entry) in corpus.iter().enumerate() {
        let name = format!("shape_{index:03}.csv");
        fs::write(dir.join(&name), cloud_to_csv(&entry.cloud))?;
        match entry.axis {
            Some(axis) => {
                labels.push_str(&format!("{name},1,{axis:.16e}\n"));
            }
            None => labels.push_str(&format!("{name},0,\n")),
        }
    }
    fs::write(dir.join("labels.csv"), labels)?;
    println!("wrote {} shapes to {}", corpus.len(), dir.display());
    Ok(())
}
