use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use tactile_core::evalkit::{cross_validate, cross_validate_two, MetricsReport, Summary};
use tactile_core::pipeline::{train_single, train_two, ModelBundle};
use tactile_core::schema::{format_real, read_dataset, read_frames, write_dataset};
use tactile_core::sim::{generate_single_force_dataset, generate_two_force_dataset};
use tactile_core::{Dataset, Error};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::fsio::{read_text, sidecar, write_atomic, write_text};
use crate::Mode;

fn core<T>(r: tactile_core::Result<T>) -> CliResult<T> {
    r.map_err(CliError::Core)
}

pub fn generate(cfg: &RunConfig, mode: Mode, out: Option<PathBuf>) -> CliResult<usize> {
    let ds = match mode {
        Mode::Single => core(generate_single_force_dataset(&cfg.skin, &cfg.single))?,
        Mode::Two => core(generate_two_force_dataset(&cfg.skin, &cfg.two))?,
    };
    let path = out.unwrap_or_else(|| cfg.paths.dataset(mode));
    let mut meta = Vec::new();
    write_atomic(&path, |w| core(write_dataset(&ds, w, &mut meta)))?;
    write_atomic(&sidecar(&path), |w| {
        core(w.write_all(&meta).map_err(Error::from))
    })?;
    Ok(ds.len())
}

pub fn load_dataset(path: &Path, mode: Mode) -> CliResult<Dataset> {
    let csv = File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    let meta_path = sidecar(path);
    let meta = if meta_path.exists() {
        Some(File::open(&meta_path).map_err(Error::from)?)
    } else {
        None
    };
    let ds = core(read_dataset(std::io::BufReader::new(csv), meta))?;
    let found = match ds.schema() {
        tactile_core::Schema::SingleContact => Mode::Single,
        tactile_core::Schema::TwoContact => Mode::Two,
    };
    if found != mode {
        return Err(CliError::Core(Error::Schema(format!(
            "{} holds a {} dataset, --mode is {}",
            path.display(),
            found.name(),
            mode.name()
        ))));
    }
    Ok(ds)
}

pub fn train(cfg: &RunConfig, mode: Mode, data: &Path, out: Option<PathBuf>) -> CliResult<PathBuf> {
    let ds = load_dataset(data, mode)?;
    let pipeline = cfg.pipeline();
    let bundle = match mode {
        Mode::Single => ModelBundle::Single(core(train_single(core(ds.as_single())?, &pipeline))?),
        Mode::Two => ModelBundle::Two(core(train_two(core(ds.as_two())?, &pipeline))?),
    };
    let path = out.unwrap_or_else(|| cfg.paths.model(mode));
    write_text(&path, &core(bundle.to_json())?)?;
    Ok(path)
}

pub fn eval(
    cfg: &RunConfig,
    mode: Mode,
    data: &Path,
    out: Option<PathBuf>,
    heatmaps: bool,
) -> CliResult<MetricsReport> {
    let ds = load_dataset(data, mode)?;
    let pipeline = cfg.pipeline();
    let report = match mode {
        Mode::Single => core(cross_validate(
            &ds,
            cfg.eval.k_single,
            cfg.eval.seed,
            &pipeline,
        ))?,
        Mode::Two => core(cross_validate_two(
            &ds,
            cfg.eval.k_two,
            cfg.eval.seed,
            &pipeline,
        ))?,
    };
    let dir = out.unwrap_or_else(|| cfg.paths.reports(mode));
    write_report_files(&report, &dir, heatmaps)?;
    Ok(report)
}

pub fn write_report_files(report: &MetricsReport, dir: &Path, heatmaps: bool) -> CliResult<()> {
    write_text(&dir.join("metrics.json"), &core(report.to_json())?)?;
    for (name, cm) in report.confusion_matrices() {
        write_text(&dir.join(format!("cm_{name}.csv")), &cm.to_csv())?;
        if heatmaps {
            write_text(&dir.join(format!("cm_{name}.pgm")), &cm.to_pgm(16))?;
        }
    }
    Ok(())
}

pub fn headline(report: &MetricsReport) -> String {
    match report {
        MetricsReport::Single(r) => format!(
            "stretch R² {:.4} MSE {:.2e} | force R² {:.4} | detection {:.4} | row {:.4} | col {:.4}",
            r.stretch.r2.pooled,
            r.stretch.mse.pooled,
            r.force.r2.pooled,
            r.detection.accuracy.pooled,
            r.localisation.row_accuracy.pooled,
            r.localisation.col_accuracy.pooled,
        ),
        MetricsReport::Two(r) => format!(
            "x1 {:.4} | y1 {:.4} | x2 {:.4} | y2 {:.4} | force R² {:.4} / {:.4} | force MSE shared {:.4} vs disjoint {:.4}",
            r.x1.accuracy.pooled,
            r.y1.accuracy.pooled,
            r.x2.accuracy.pooled,
            r.y2.accuracy.pooled,
            r.force1.r2.pooled,
            r.force2.r2.pooled,
            r.sharing.shared.mse,
            r.sharing.disjoint.mse,
        ),
    }
}

fn summary_line(name: &str, s: &Summary) -> String {
    format!(
        "{name:<22} {:>10.6} {:>10.6} ± {:.6}\n",
        s.pooled, s.mean, s.std
    )
}

/// Table of pooled and fold-averaged values.
pub fn summary(report: &MetricsReport) -> String {
    let mut out = format!("{:<22} {:>10} {:>10}\n", "metric", "pooled", "fold mean");
    let rows: Vec<(&str, &Summary)> = match report {
        MetricsReport::Single(r) => vec![
            ("stretch r2", &r.stretch.r2),
            ("stretch mse", &r.stretch.mse),
            ("force r2", &r.force.r2),
            ("force mse", &r.force.mse),
            ("detection accuracy", &r.detection.accuracy),
            ("row accuracy", &r.localisation.row_accuracy),
            ("col accuracy", &r.localisation.col_accuracy),
        ],
        MetricsReport::Two(r) => vec![
            ("x1 accuracy", &r.x1.accuracy),
            ("y1 accuracy", &r.y1.accuracy),
            ("x2 accuracy", &r.x2.accuracy),
            ("y2 accuracy", &r.y2.accuracy),
            ("force1 r2", &r.force1.r2),
            ("force1 mse", &r.force1.mse),
            ("force2 r2", &r.force2.r2),
            ("force2 mse", &r.force2.mse),
        ],
    };
    for (name, s) in rows {
        out.push_str(&summary_line(name, s));
    }
    if let MetricsReport::Two(r) = report {
        out.push_str(&format!(
            "force mse, shared terminal ({} pairs): {:.6}; disjoint ({} pairs): {:.6}\n",
            r.sharing.shared.n, r.sharing.shared.mse, r.sharing.disjoint.n, r.sharing.disjoint.mse
        ));
    }
    out
}

pub fn report(path: &Path, out: Option<PathBuf>, heatmaps: bool) -> CliResult<String> {
    let report = core(MetricsReport::from_json(&read_text(path)?))?;
    if let Some(dir) = out {
        write_report_files(&report, &dir, heatmaps)?;
    }
    Ok(summary(&report))
}

pub fn infer(
    mode: Option<Mode>,
    model: &Path,
    frames: &Path,
    out: Option<PathBuf>,
) -> CliResult<usize> {
    let bundle = core(ModelBundle::from_json(&read_text(model)?))?;
    if let Some(m) = mode {
        if m.name() != bundle.mode_name() {
            return Err(CliError::Core(Error::Schema(format!(
                "{} holds a {} model, --mode is {}",
                model.display(),
                bundle.mode_name(),
                m.name()
            ))));
        }
    }
    let file = File::open(frames).map_err(Error::from)?;
    let frames = core(read_frames(std::io::BufReader::new(file)))?;
    let n = frames.len();
    let fill = |w: &mut dyn Write| -> CliResult<()> {
        let mut csv = csv_writer(w);
        match &bundle {
            ModelBundle::Single(p) => {
                row(
                    &mut csv,
                    &["stretch", "contact_detected", "node_x", "node_y", "force_n"],
                )?;
                for f in &frames {
                    let e = p.infer(f);
                    row(
                        &mut csv,
                        &[
                            format_real(e.stretch),
                            (e.contact_detected as u8).to_string(),
                            e.node.x().to_string(),
                            e.node.y().to_string(),
                            format_real(e.force),
                        ],
                    )?;
                }
            }
            ModelBundle::Two(m) => {
                row(
                    &mut csv,
                    &["n_contacts", "x1", "y1", "f1_n", "x2", "y2", "f2_n"],
                )?;
                for f in &frames {
                    let e = m.infer(f);
                    let mut cells = vec![e.contacts.len().to_string()];
                    for i in 0..2 {
                        match e.contacts.get(i) {
                            Some((n, force)) => cells.extend([
                                n.x().to_string(),
                                n.y().to_string(),
                                format_real(*force),
                            ]),
                            None => cells.extend(["0".into(), "0".into(), "0".into()]),
                        }
                    }
                    row(&mut csv, &cells)?;
                }
            }
        }
        csv.flush().map_err(Error::from)?;
        Ok(())
    };
    match out {
        Some(path) => write_atomic(&path, fill)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            fill(&mut lock)?;
        }
    }
    Ok(n)
}

fn csv_writer(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn row<S: AsRef<[u8]>>(w: &mut csv::Writer<&mut dyn Write>, cells: &[S]) -> CliResult<()> {
    w.write_record(cells)
        .map_err(|e| CliError::Core(Error::Io(std::io::Error::other(e.to_string()))))
}
