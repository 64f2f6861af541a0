//! Experiment presets: each produces CSV tables plus a key-value manifest
//! of the derived constants, written under an output directory. All runs
//! are seeded and single-sourced from the emitted instance file, so every
//! manifest constant can be recomputed from the artifacts alone.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use umls_core::analysis::{
    eta_max, linear_error_bound, optimal_step, rho_m_eta, roc_constants, StationaryAnalysis,
};
use umls_core::instances::{
    example_2d, generate_synthetic, initial_point_near, StationaryPoint2D, SyntheticInstance,
};
use umls_core::io::{
    fmt_float, instance_to_string, meta_to_string, stationary_points_to_csv,
};
use umls_core::problem::{spectral_norm, UnitModulusPoint};
use umls_core::projection::project;
use umls_core::solvers::{arnapgd_run, backtracking_pgd_run, pgd_run, SolverConfig};
use umls_core::sublinear_bound;
use umls_core::{Error, Result};

use crate::parallel::parallel_map;

pub const DEFAULT_SEED: u64 = 422;
pub const DEFAULT_FIG5_ETA: f64 = 0.0755;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
    Fig5,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }

    pub fn parse(s: &str) -> Option<Figure> {
        match s {
            "fig1" => Some(Figure::Fig1),
            "fig2a" => Some(Figure::Fig2a),
            "fig2b" => Some(Figure::Fig2b),
            "fig3" => Some(Figure::Fig3),
            "fig4" => Some(Figure::Fig4),
            "fig5" => Some(Figure::Fig5),
            _ => None,
        }
    }

    pub const ALL: [Figure; 6] = [
        Figure::Fig1,
        Figure::Fig2a,
        Figure::Fig2b,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
    ];
}

/// Knobs for one experiment run. Build with [`ExperimentConfig::preset`] and
/// override fields as needed.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Figure,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    /// Fixed step for the 2-D region experiment.
    pub eta: Option<f64>,
    /// Explicit step list for the divergence traces; defaults are derived
    /// from the instance.
    pub etas: Option<Vec<f64>>,
    /// Grid size of the rate-vs-step sweep.
    pub sweep_count: usize,
    /// Growth divisors compared by the backtracking experiment.
    pub alphas: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub max_iters: usize,
    pub sigma_noise: f64,
    /// Number of equally spaced circle starts in the region experiment.
    pub angles: usize,
}

impl ExperimentConfig {
    pub fn preset(experiment: Figure, seed: u64) -> Self {
        let max_iters = match experiment {
            Figure::Fig1 | Figure::Fig2a | Figure::Fig2b | Figure::Fig5 => 1000,
            Figure::Fig3 | Figure::Fig4 => 5000,
        };
        Self {
            experiment,
            seed,
            m: 50,
            n: 40,
            eta: None,
            etas: None,
            sweep_count: 1000,
            alphas: vec![1.0, 0.8, 0.6, 0.4],
            alpha: 0.8,
            beta: 0.8,
            max_iters,
            sigma_noise: 1e-3,
            angles: 1000,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.sweep_count < 2 {
            return Err(Error::InvalidConfig(format!(
                "sweep count must be at least 2, got {}",
                self.sweep_count
            )));
        }
        if self.angles < 2 {
            return Err(Error::InvalidConfig(format!(
                "angle count must be at least 2, got {}",
                self.angles
            )));
        }
        Ok(())
    }
}

/// Ordered key-value manifest.
#[derive(Debug, Clone, Default)]
pub struct Manifest(Vec<(String, String)>);

impl Manifest {
    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.0.push((key.to_string(), value.into()));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, fmt_float(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.0 {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

/// One CSV table; `name` becomes the file stem.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub name: String,
    pub text: String,
}

impl CsvTable {
    fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            text: String::new(),
        }
    }

    fn header(&mut self, header: &str) {
        self.text.push_str(header);
        self.text.push('\n');
    }

    fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn n_rows(&self) -> usize {
        self.text.lines().count().saturating_sub(1)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub manifest: Manifest,
    pub tables: Vec<CsvTable>,
    /// Non-CSV artifacts (instance file and sidecar), name and content.
    pub files: Vec<(String, String)>,
}

impl ExperimentResult {
    pub fn table(&self, name: &str) -> Option<&CsvTable> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Writes manifest, tables, and artifacts into `dir`; returns the paths.
pub fn write_result(
    result: &ExperimentResult,
    figure: Figure,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let manifest_path = dir.join(format!("{}_manifest.txt", figure.name()));
    std::fs::write(&manifest_path, result.manifest.to_text())?;
    written.push(manifest_path);
    for table in &result.tables {
        let path = dir.join(format!("{}.csv", table.name));
        std::fs::write(&path, &table.text)?;
        written.push(path);
    }
    for (name, content) in &result.files {
        let path = dir.join(name);
        std::fs::write(&path, content)?;
        written.push(path);
    }
    Ok(written)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    match cfg.experiment {
        Figure::Fig1 => run_fig1(cfg),
        Figure::Fig2a | Figure::Fig2b => run_fig2(cfg),
        Figure::Fig3 => run_fig3(cfg),
        Figure::Fig4 => run_fig4(cfg),
        Figure::Fig5 => run_fig5(cfg),
    }
}

/// Companion gnuplot script for a figure's CSV tables.
fn gnuplot_script(figure: Figure, extra: &str) -> (String, String) {
    let mut s = String::from("set datafile separator ','\nset key outside\nset grid\n");
    match figure {
        Figure::Fig1 => {
            s.push_str(
                "set logscale y\nset xlabel 'iteration k'\nset ylabel 'step distance'\n\
                 plot 'fig1.csv' using 1:2 with lines title 'observed', \\\n     \
                 'fig1.csv' using 1:3 with lines dt 2 title 'sublinear bound', \\\n     \
                 'fig1.csv' using 1:4 with lines dt 3 title 'linear bound'\n",
            );
        }
        Figure::Fig2a => {
            s.push_str(
                "set xlabel 'step size'\nset ylabel 'rate'\nset yrange [0:1.5]\n\
                 plot 'fig2a.csv' using 1:2 with lines title 'rho(M_eta)', 1 dt 2 title ''\n",
            );
        }
        Figure::Fig2b => {
            s.push_str("set logscale y\nset xlabel 'iteration k'\nset ylabel 'error'\nplot ");
            s.push_str(extra);
            s.push('\n');
        }
        Figure::Fig3 => {
            s.push_str("set logscale y\nset xlabel 'iteration k'\nset ylabel 'error'\nplot ");
            s.push_str(extra);
            s.push('\n');
        }
        Figure::Fig4 => {
            s.push_str(
                "set logscale y\nset xlabel 'iteration k'\nset ylabel 'error'\n\
                 plot 'fig4.csv' using 1:2 with lines title 'PGD 1/|A|^2', \\\n     \
                 'fig4.csv' using 1:3 with lines title 'PGD eta*', \\\n     \
                 'fig4.csv' using 1:4 with lines title 'Bt-PGD', \\\n     \
                 'fig4.csv' using 1:5 with lines title 'accelerated'\n",
            );
        }
        Figure::Fig5 => {
            s.push_str(
                "set size square\nset xlabel 'x1'\nset ylabel 'x2'\nset parametric\n\
                 plot [0:2*pi] cos(t),sin(t) with lines lc 'gray' title '', \\\n     \
                 'fig5.csv' using (cos($1)):(sin($1)):4 with points palette pt 7 ps 0.4 title 'start by basin', \\\n     \
                 'fig5_stationary.csv' using 2:3 with points pt 5 ps 1.5 lc 'black' title 'stationary points'\n",
            );
        }
    }
    (format!("{}.gnuplot", figure.name()), s)
}

/// Shared state of the synthetic-instance experiments.
pub struct StandardSetup {
    pub inst: SyntheticInstance,
    pub sa: StationaryAnalysis,
    pub spec_norm: f64,
    pub eta_star: f64,
    pub rho_star: f64,
    pub eta_max: f64,
    pub noise_seed: u64,
    pub x0: UnitModulusPoint,
}

pub fn standard_setup(cfg: &ExperimentConfig) -> Result<StandardSetup> {
    cfg.validate()?;
    let inst = generate_synthetic(cfg.m, cfg.n, cfg.seed, 0.1, 100)?;
    let sa = StationaryAnalysis::at(&inst.problem, &inst.x_star);
    let spec_norm = spectral_norm(inst.problem.a())?;
    let (eta_star, rho_star) = optimal_step(&sa.h, &sa.gamma)?;
    let e_max = eta_max(&sa.h, &sa.gamma)?;
    let noise_seed = cfg.seed.wrapping_add(1);
    let x0 = initial_point_near(&inst.x_star, cfg.sigma_noise, noise_seed);
    Ok(StandardSetup {
        inst,
        sa,
        spec_norm,
        eta_star,
        rho_star,
        eta_max: e_max,
        noise_seed,
        x0,
    })
}

fn base_manifest(cfg: &ExperimentConfig, setup: &StandardSetup) -> Manifest {
    let mut m = Manifest::default();
    m.push("experiment", cfg.experiment.name());
    m.push("seed", cfg.seed.to_string());
    m.push("noise_seed", setup.noise_seed.to_string());
    m.push("m", cfg.m.to_string());
    m.push("n", cfg.n.to_string());
    m.push_f64("sigma_noise", cfg.sigma_noise);
    m.push("max_iters", cfg.max_iters.to_string());
    m.push("retries_used", setup.inst.retries_used.to_string());
    m.push_f64("spec_norm_a", setup.spec_norm);
    m.push_f64("eta_star", setup.eta_star);
    m.push_f64("rho_star", setup.rho_star);
    m.push_f64("eta_max", setup.eta_max);
    m.push(
        "mv_product_accounting",
        "each application of A or A^T to a vector counts as one product",
    );
    m
}

fn instance_files(setup: &StandardSetup) -> Vec<(String, String)> {
    vec![
        ("instance.txt".to_string(), instance_to_string(&setup.inst.problem)),
        ("instance.txt.meta".to_string(), meta_to_string(&setup.inst)),
    ]
}

/// Step-distance decay of fixed-step PGD at `η = 0.9/‖A‖₂²` against the
/// sublinear bound and the triangle-inequality linear bound. The start is
/// pulled inside the linear-rate region so the linear bound is valid.
pub fn run_fig1(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let setup = standard_setup(cfg)?;
    let eta = 0.9 / (setup.spec_norm * setup.spec_norm);
    let rho = rho_m_eta(&setup.sa.h, &setup.sa.gamma, eta)?;
    let roc = roc_constants(&setup.inst.problem, &setup.sa.gamma, &setup.sa.h, eta)?;

    // Rescale the initialization offset into the region where the linear
    // error bound applies.
    let x_star_v = setup.inst.x_star.as_vector();
    let mut x0 = setup.x0.clone();
    let mut delta0 = (x0.as_vector() - x_star_v).norm();
    for _ in 0..20 {
        if delta0 <= 0.6 * roc.c1 {
            break;
        }
        let scaled = x_star_v + (0.5 * roc.c1 / delta0) * (x0.as_vector() - x_star_v);
        x0 = project(&scaled);
        delta0 = (x0.as_vector() - x_star_v).norm();
    }
    if !(delta0 < roc.c1) {
        return Err(Error::OutsideRegion {
            norm_delta0: delta0,
            c1: roc.c1,
        });
    }

    let solver_cfg =
        SolverConfig::fixed_step(eta, cfg.max_iters).with_reference(setup.inst.x_star.clone());
    let trace = pgd_run(&setup.inst.problem, &x0, &solver_cfg)?;

    let f0 = trace.records[0].f;
    let f_final = trace.final_objective();
    let gamma_max = setup.sa.gamma.max();
    let gamma_min = setup.sa.gamma.min();
    let err_bound = |k: usize| -> Result<f64> {
        linear_error_bound(delta0, rho, roc.c0, gamma_max, gamma_min, eta, k)
    };

    let dists = trace.step_distances();
    let mut table = CsvTable::new("fig1");
    table.header("k,step_dist,sublinear_bound,linear_bound");
    for k in 1..trace.len() - 1 {
        let sub = sublinear_bound(f0, f_final, eta, setup.spec_norm, k)?;
        let lin = err_bound(k)? + err_bound(k + 1)?;
        table.row(&[
            k.to_string(),
            fmt_float(dists[k]),
            fmt_float(sub),
            fmt_float(lin),
        ]);
    }

    let mut manifest = base_manifest(cfg, &setup);
    manifest.push_f64("eta", eta);
    manifest.push_f64("rho", rho);
    manifest.push_f64("c0", roc.c0);
    manifest.push_f64("c1", roc.c1);
    manifest.push_f64("c_eta", roc.c_eta);
    manifest.push_f64("delta0", delta0);
    manifest.push_f64("f0", f0);
    manifest.push_f64("f_final", f_final);

    let mut files = instance_files(&setup);
    files.push(gnuplot_script(Figure::Fig1, ""));
    Ok(ExperimentResult {
        manifest,
        tables: vec![table],
        files,
    })
}

/// Rate-vs-step sweep (`fig2a`) and error traces across step sizes
/// including divergent ones (`fig2b`).
pub fn run_fig2(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let setup = standard_setup(cfg)?;
    let mut manifest = base_manifest(cfg, &setup);
    let mut tables = Vec::new();

    if matches!(cfg.experiment, Figure::Fig2a) {
        manifest.push("sweep_count", cfg.sweep_count.to_string());
        let count = cfg.sweep_count;
        let hi = 1.1 * setup.eta_max;
        let rows = parallel_map(count, |j| {
            let eta = hi * (j + 1) as f64 / count as f64;
            let rho = rho_m_eta(&setup.sa.h, &setup.sa.gamma, eta)
                .unwrap_or(f64::INFINITY);
            (eta, rho)
        });
        let mut table = CsvTable::new("fig2a");
        table.header("eta,rho");
        let mut best = (f64::NAN, f64::INFINITY);
        for (eta, rho) in rows {
            if rho < best.1 {
                best = (eta, rho);
            }
            table.row(&[fmt_float(eta), fmt_float(rho)]);
        }
        manifest.push_f64("sweep_min_rho_eta", best.0);
        manifest.push_f64("sweep_min_rho", best.1);
        tables.push(table);
    }

    if matches!(cfg.experiment, Figure::Fig2b) {
        let etas = cfg.etas.clone().unwrap_or_else(|| {
            vec![
                1.0 / (setup.spec_norm * setup.spec_norm),
                setup.eta_star,
                1.05 * setup.eta_max,
                1.2 * setup.eta_max,
            ]
        });
        let mut traces = Vec::new();
        let mut rhos = Vec::new();
        for (i, eta) in etas.iter().enumerate() {
            let solver_cfg = SolverConfig::fixed_step(*eta, cfg.max_iters)
                .with_reference(setup.inst.x_star.clone());
            let trace = pgd_run(&setup.inst.problem, &setup.x0, &solver_cfg)?;
            let rho = rho_m_eta(&setup.sa.h, &setup.sa.gamma, *eta).unwrap_or(f64::NAN);
            manifest.push_f64(&format!("eta{}", i + 1), *eta);
            manifest.push_f64(&format!("rho{}", i + 1), rho);
            traces.push(trace);
            rhos.push(rho);
        }
        let mut table = CsvTable::new("fig2b");
        let mut header = String::from("k");
        for i in 1..=etas.len() {
            let _ = write!(header, ",err_eta{i},env_eta{i}");
        }
        table.header(&header);
        let rows = traces.iter().map(|t| t.len()).min().unwrap_or(0);
        for k in 0..rows {
            let mut cells = vec![k.to_string()];
            for (trace, rho) in traces.iter().zip(&rhos) {
                let err = trace.records[k].err_to_ref.unwrap_or(f64::NAN);
                let env = trace.records[0].err_to_ref.unwrap_or(f64::NAN)
                    * rho.powi(k as i32);
                cells.push(fmt_float(err));
                cells.push(fmt_float(env));
            }
            table.row(&cells);
        }
        tables.push(table);
    }

    let mut files = instance_files(&setup);
    if matches!(cfg.experiment, Figure::Fig2a) {
        files.push(gnuplot_script(Figure::Fig2a, ""));
    }
    if matches!(cfg.experiment, Figure::Fig2b) {
        let n_etas = cfg.etas.as_ref().map(|e| e.len()).unwrap_or(4);
        let plot: Vec<String> = (1..=n_etas)
            .map(|i| {
                format!(
                    "'fig2b.csv' using 1:{} with lines title 'eta{}', 'fig2b.csv' using 1:{} with lines dt 2 title 'envelope {}'",
                    2 * i, i, 2 * i + 1, i
                )
            })
            .collect();
        files.push(gnuplot_script(Figure::Fig2b, &plot.join(", \\\n     ")));
    }
    Ok(ExperimentResult {
        manifest,
        tables,
        files,
    })
}

/// Backtracking PGD across growth divisors `alpha` at fixed `beta`,
/// tracking error, cumulative matrix-vector products, and the accepted step
/// size per iteration.
pub fn run_fig3(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let setup = standard_setup(cfg)?;
    let mut manifest = base_manifest(cfg, &setup);
    manifest.push_f64("beta", cfg.beta);
    manifest.push(
        "alphas",
        cfg.alphas
            .iter()
            .map(|a| fmt_float(*a))
            .collect::<Vec<_>>()
            .join(" "),
    );

    let mut tables = Vec::new();
    for alpha in &cfg.alphas {
        let solver_cfg = SolverConfig::backtracking(*alpha, cfg.beta, cfg.max_iters)
            .with_reference(setup.inst.x_star.clone());
        let trace = backtracking_pgd_run(&setup.inst.problem, &setup.x0, &solver_cfg)?;
        let mut table = CsvTable::new(format!("fig3_alpha_{}", alpha));
        table.header("k,err,mvprods,eta");
        for rec in &trace.records {
            table.row(&[
                rec.k.to_string(),
                fmt_float(rec.err_to_ref.unwrap_or(f64::NAN)),
                rec.mv_products.to_string(),
                fmt_float(rec.eta),
            ]);
        }
        manifest.push_f64(
            &format!("final_err_alpha_{alpha}"),
            trace.records.last().unwrap().err_to_ref.unwrap_or(f64::NAN),
        );
        tables.push(table);
    }

    let plot: Vec<String> = cfg
        .alphas
        .iter()
        .map(|a| format!("'fig3_alpha_{a}.csv' using 1:2 with lines title 'alpha={a}'"))
        .collect();
    let mut files = instance_files(&setup);
    files.push(gnuplot_script(Figure::Fig3, &plot.join(", \\\n     ")));
    Ok(ExperimentResult {
        manifest,
        tables,
        files,
    })
}

/// The four-solver comparison on one instance: fixed Lipschitz step, fixed
/// optimal step, backtracking, and accelerated with restarts.
pub fn run_fig4(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let setup = standard_setup(cfg)?;
    let eta_lip = 1.0 / (setup.spec_norm * setup.spec_norm);
    let reference = setup.inst.x_star.clone();

    let pgd_lip = pgd_run(
        &setup.inst.problem,
        &setup.x0,
        &SolverConfig::fixed_step(eta_lip, cfg.max_iters).with_reference(reference.clone()),
    )?;
    let pgd_opt = pgd_run(
        &setup.inst.problem,
        &setup.x0,
        &SolverConfig::fixed_step(setup.eta_star, cfg.max_iters).with_reference(reference.clone()),
    )?;
    let bt = backtracking_pgd_run(
        &setup.inst.problem,
        &setup.x0,
        &SolverConfig::backtracking(cfg.alpha, cfg.beta, cfg.max_iters)
            .with_reference(reference.clone()),
    )?;
    let arnag = arnapgd_run(
        &setup.inst.problem,
        &setup.x0,
        &SolverConfig::backtracking(cfg.alpha, cfg.beta, cfg.max_iters).with_reference(reference),
    )?;

    let mut manifest = base_manifest(cfg, &setup);
    manifest.push_f64("eta_lip", eta_lip);
    manifest.push_f64("alpha", cfg.alpha);
    manifest.push_f64("beta", cfg.beta);
    for (name, trace) in [
        ("pgd_lip", &pgd_lip),
        ("pgd_opt", &pgd_opt),
        ("bt", &bt),
        ("arnag", &arnag),
    ] {
        let iters = trace
            .iterations_to_error(1e-8)
            .map(|k| k.to_string())
            .unwrap_or_else(|| "unreached".to_string());
        manifest.push(&format!("iters_to_1e-8_{name}"), iters);
    }

    let mut table = CsvTable::new("fig4");
    table.header("k,err_pgd_lip,err_pgd_opt,err_bt,err_arnag");
    let rows = [&pgd_lip, &pgd_opt, &bt, &arnag]
        .iter()
        .map(|t| t.len())
        .min()
        .unwrap();
    for k in 0..rows {
        table.row(&[
            k.to_string(),
            fmt_float(pgd_lip.records[k].err_to_ref.unwrap_or(f64::NAN)),
            fmt_float(pgd_opt.records[k].err_to_ref.unwrap_or(f64::NAN)),
            fmt_float(bt.records[k].err_to_ref.unwrap_or(f64::NAN)),
            fmt_float(arnag.records[k].err_to_ref.unwrap_or(f64::NAN)),
        ]);
    }

    let mut files = instance_files(&setup);
    files.push(gnuplot_script(Figure::Fig4, ""));
    Ok(ExperimentResult {
        manifest,
        tables: vec![table],
        files,
    })
}

/// Region-of-convergence scan of the 2-D circle example: PGD from equally
/// spaced starts, classified by which minimum's theoretical ball the final
/// iterate lands in.
pub fn run_fig5(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let inst = example_2d();
    let eta = cfg.eta.unwrap_or(DEFAULT_FIG5_ETA);
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "region experiment needs a positive finite step, got {eta}"
        )));
    }

    let minima: Vec<&StationaryPoint2D> = inst.minima();
    let mut radii = Vec::new();
    let mut manifest = Manifest::default();
    manifest.push("experiment", cfg.experiment.name());
    manifest.push_f64("eta", eta);
    manifest.push("angles", cfg.angles.to_string());
    manifest.push("max_iters", cfg.max_iters.to_string());
    manifest.push("a_diag", "5 1");
    manifest.push("b", "3.5 0.2");
    manifest.push("x_unconstrained", "0.7 0.2");

    for (idx, s) in minima.iter().enumerate() {
        let h = nalgebra::DMatrix::from_row_slice(1, 1, &[s.h]);
        let gamma = nalgebra::DVector::from_column_slice(&[s.gamma]);
        let rho_eta = rho_m_eta(&h, &gamma, eta)?;
        let e_max = eta_max(&h, &gamma)?;
        let roc = roc_constants(&inst.problem, &gamma, &h, eta)?;
        let tag = format!("min{}", idx + 1);
        manifest.push_f64(&format!("{tag}_t"), s.angle);
        manifest.push_f64(&format!("{tag}_x1"), s.x.as_vector()[0]);
        manifest.push_f64(&format!("{tag}_x2"), s.x.as_vector()[1]);
        manifest.push_f64(&format!("{tag}_gamma"), s.gamma);
        manifest.push_f64(&format!("{tag}_h"), s.h);
        manifest.push_f64(&format!("{tag}_rho_eta"), rho_eta);
        manifest.push_f64(&format!("{tag}_eta_max"), e_max);
        manifest.push_f64(
            &format!("{tag}_eta_max_formula"),
            2.0 / (s.h + 2.0 * s.gamma),
        );
        manifest.push_f64(&format!("{tag}_c0"), roc.c0);
        manifest.push_f64(&format!("{tag}_c1"), roc.c1);
        radii.push(roc.c0);
    }

    // Config is validated above; the per-angle runs cannot fail.
    let two_pi = 2.0 * std::f64::consts::PI;
    let endpoints = parallel_map(cfg.angles, |j| {
        let t = two_pi * j as f64 / cfg.angles as f64;
        let x0 = project(&nalgebra::DVector::from_column_slice(&[t.cos(), t.sin()]));
        let solver_cfg = SolverConfig::fixed_step(eta, cfg.max_iters);
        let trace = pgd_run(&inst.problem, &x0, &solver_cfg).expect("validated fixed-step run");
        let end = trace.final_point().as_vector().clone();
        (t, end)
    });

    let mut table = CsvTable::new("fig5");
    table.header("t,x1_end,x2_end,class");
    for (t, end) in &endpoints {
        let mut class = 0usize;
        let mut best = f64::INFINITY;
        for (idx, s) in minima.iter().enumerate() {
            let d = (end - s.x.as_vector()).norm();
            if d < radii[idx] && d < best {
                best = d;
                class = idx + 1;
            }
        }
        table.row(&[
            fmt_float(*t),
            fmt_float(end[0]),
            fmt_float(end[1]),
            class.to_string(),
        ]);
    }

    let mut stationary = CsvTable::new("fig5_stationary");
    stationary.text = stationary_points_to_csv(&inst.stationary_points);

    Ok(ExperimentResult {
        manifest,
        tables: vec![table, stationary],
        files: vec![
            ("instance.txt".to_string(), instance_to_string(&inst.problem)),
            gnuplot_script(Figure::Fig5, ""),
        ],
    })
}

/// Parsed row of the fig5 table, for downstream checks.
pub fn parse_fig5_rows(table: &CsvTable) -> Vec<(f64, f64, f64, usize)> {
    table
        .text
        .lines()
        .skip(1)
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            (
                cells[0].parse().unwrap(),
                cells[1].parse().unwrap(),
                cells[2].parse().unwrap(),
                cells[3].parse().unwrap(),
            )
        })
        .collect()
}
