//! Staged report pipeline. Stages run in workflow order and write
//! numbered files into the output directory; a run that stops early leaves
//! an `INCOMPLETE` marker naming the failed stage.

use std::collections::HashMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use bgvar_bayes::diagnostics::{
    cross_unit_buckets, cross_unit_mean_abs_corr, geweke_diag, percent, posterior_mean_residuals,
    residual_autocorr_buckets, CorrBuckets, PValueBuckets, Z_CRITICAL,
};
use bgvar_bayes::drawfile::{read_draws, write_draws};
use bgvar_bayes::forecast::{forecast, Constraint, ForecastSpec, ShockMode};
use bgvar_bayes::girf::girf_draws;
use bgvar_bayes::quantile::{pointwise_quantiles, LEVELS};
use bgvar_bayes::rng::derive_seed;
use bgvar_bayes::{filter_stable, sample_posterior, PosteriorDraws};
use bgvar_core::gvar::{estimate_gvar, global_data, write_global_model, GlobalLayout, SolvedGlobal, StackOptions};
use bgvar_core::panel::{IngestOptions, Panel, TransformSpec};
use bgvar_core::regress::rolling_ols;
use bgvar_core::stattests::{adf_test, granger_test, jarque_bera, johansen_trace, pp_test, AdfOptions};
use bgvar_core::var::{estimate_var, is_stable, residual_rms, select_lag, var_stability};
use bgvar_core::weights::{FlowTable, WeightMatrix, WeightMode};
use nalgebra::{DMatrix, DVector};

use crate::chart::{self, ChartOptions, ChartPanel};
use crate::config::RunConfig;
use crate::emit::{self, exact, num, pvalue_cell, pvalue_cell_precise, ratio, rolling_marker, trim_decimal, Grid};
use crate::error::CliError;

pub const INCOMPLETE: &str = "INCOMPLETE";
pub const DRAWS_FILE: &str = "04_bgvar_draws.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Stationarity,
    Rollreg,
    Var,
    Granger,
    Johansen,
    Gvar,
    Bgvar,
    Forecast,
    Girf,
}

impl Stage {
    pub const ALL: [Stage; 10] = [
        Stage::Ingest,
        Stage::Stationarity,
        Stage::Rollreg,
        Stage::Var,
        Stage::Granger,
        Stage::Johansen,
        Stage::Gvar,
        Stage::Bgvar,
        Stage::Forecast,
        Stage::Girf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Stationarity => "stationarity",
            Stage::Rollreg => "rollreg",
            Stage::Var => "var",
            Stage::Granger => "granger",
            Stage::Johansen => "johansen",
            Stage::Gvar => "gvar",
            Stage::Bgvar => "bgvar",
            Stage::Forecast => "forecast",
            Stage::Girf => "girf",
        }
    }
}

/// Inputs shared by every stage.
pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub provenance: String,
    /// Selected observations before transformation.
    pub raw: Panel,
    /// Model-scale panel.
    pub panel: Panel,
    pub flows: FlowTable,
    draws: Option<PosteriorDraws>,
}

impl Context {
    pub fn load(cfg: &RunConfig) -> Result<Context, CliError> {
        cfg.validate()?;
        let opts = IngestOptions { interpolate_gaps: cfg.data.interpolate_gaps };
        let full = Panel::read_long_csv(cfg.resolve(&cfg.data.panel), opts)
            .map_err(|e| CliError::from(e).prefixed(&format!("{}", cfg.data.panel.display())))?;
        let countries =
            if cfg.data.countries.is_empty() { full.countries().to_vec() } else { cfg.data.countries.clone() };
        let variables =
            if cfg.data.variables.is_empty() { full.variables().to_vec() } else { cfg.data.variables.clone() };
        let raw = full.select(&countries, &variables)?;
        for name in cfg.transform.keys() {
            if !variables.contains(name) {
                return Err(CliError::Config(format!("transform names unknown variable '{name}'")));
            }
        }
        let specs: HashMap<String, TransformSpec> = cfg.transform.iter().map(|(k, v)| (k.clone(), *v)).collect();
        let panel = raw.transform(&specs)?;
        let flows = FlowTable::read_path(cfg.resolve(&cfg.data.weights))
            .map_err(|e| CliError::from(e).prefixed(&format!("{}", cfg.data.weights.display())))?;
        Ok(Context {
            cfg: cfg.clone(),
            out: cfg.output_dir.clone(),
            provenance: cfg.provenance(),
            raw,
            panel,
            flows,
            draws: None,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn grid(&self, name: &str, grid: &Grid) -> Result<(), CliError> {
        emit::write_grid(&self.path(name), grid, &self.provenance)
    }

    fn text(&self, name: &str, body: &str) -> Result<(), CliError> {
        emit::write_text(&self.path(name), &format!("# {}\n{body}", self.provenance))
    }

    /// Row-stochastic weights over the panel countries, used for estimation.
    fn estimation_weights(&self) -> Result<WeightMatrix, CliError> {
        Ok(self.flows.normalize(WeightMode::RowStochastic)?.restrict(self.panel.countries())?)
    }

    fn stack_options(&self) -> StackOptions {
        StackOptions { condition_ceiling: self.cfg.gvar.condition_ceiling }
    }

    fn seed(&self, stage: &str) -> u64 {
        derive_seed(self.cfg.seed, stage)
    }

    /// Whether a variable is modelled in logs without differencing, so its
    /// forecasts are reported back on the level scale.
    fn exp_display(&self, variable: &str) -> bool {
        self.cfg.transform.get(variable).is_some_and(|t| t.log && t.diff == 0)
    }

    fn chart_variable(&self) -> Result<(usize, String), CliError> {
        let vars = self.panel.variables();
        let name = if self.cfg.forecast.chart_variable.is_empty() {
            vars[0].clone()
        } else {
            self.cfg.forecast.chart_variable.clone()
        };
        let v = vars
            .iter()
            .position(|x| *x == name)
            .ok_or_else(|| CliError::Config(format!("forecast.chart_variable '{name}' is not a panel variable")))?;
        Ok((v, name))
    }
}

impl CliError {
    fn prefixed(self, what: &str) -> CliError {
        match self {
            CliError::Data(m) => CliError::Data(format!("{what}: {m}")),
            CliError::Config(m) => CliError::Config(format!("{what}: {m}")),
            e => e,
        }
    }
}

/// Run the given stages in workflow order.
pub fn run(cfg: &RunConfig, stages: &[Stage]) -> Result<(), CliError> {
    let mut stages = stages.to_vec();
    stages.sort();
    stages.dedup();
    let out = &cfg.output_dir;
    fs::create_dir_all(out)?;
    let marker = out.join(INCOMPLETE);
    let names: Vec<&str> = stages.iter().map(|s| s.name()).collect();
    fs::write(&marker, format!("running: {}\n", names.join(" ")))?;
    let result = run_stages(cfg, &stages);
    match &result {
        Ok(()) => fs::remove_file(&marker)?,
        Err(e) => fs::write(&marker, format!("{e}\noutputs in this directory are partial\n"))?,
    }
    result
}

/// The full pipeline.
pub fn run_report(cfg: &RunConfig) -> Result<(), CliError> {
    run(cfg, &Stage::ALL)
}

fn run_stages(cfg: &RunConfig, stages: &[Stage]) -> Result<(), CliError> {
    let mut ctx = Context::load(cfg).map_err(|e| e.in_stage("ingest"))?;
    emit::write_text(&ctx.path("00_config.toml"), &format!("# {}\n{}", ctx.provenance, cfg.canonical().to_toml()))
        .map_err(|e| e.in_stage("ingest"))?;
    for &stage in stages {
        let r = match stage {
            Stage::Ingest => ingest(&ctx),
            Stage::Stationarity => stationarity(&ctx),
            Stage::Rollreg => rollreg(&ctx),
            Stage::Var => var(&ctx),
            Stage::Granger => granger(&ctx),
            Stage::Johansen => johansen(&ctx),
            Stage::Gvar => gvar(&ctx),
            Stage::Bgvar => bgvar(&mut ctx),
            Stage::Forecast => forecasts(&mut ctx),
            Stage::Girf => girf(&mut ctx),
        };
        r.map_err(|e| e.in_stage(stage.name()))?;
    }
    Ok(())
}

fn ingest(ctx: &Context) -> Result<(), CliError> {
    let p = &ctx.panel;
    let mut g = Grid::new(["country", "variable", "date", "value"]);
    for (c, country) in p.countries().iter().enumerate() {
        for (v, var) in p.variables().iter().enumerate() {
            for (t, period) in p.periods().iter().enumerate() {
                g.push(vec![country.clone(), var.clone(), period.to_string(), exact(p.value(c, v, t))]);
            }
        }
    }
    ctx.grid("00_panel_transformed.csv", &g)
}

fn stationarity(ctx: &Context) -> Result<(), CliError> {
    let p = &ctx.panel;
    let st = &ctx.cfg.stationarity;
    let adf_opts =
        AdfOptions { max_lag: st.adf_max_lag, selection: st.adf_lag_selection, deterministic: st.deterministic };
    let header = || std::iter::once("country \\ variable".to_string()).chain(p.variables().iter().cloned());
    let mut adf_grid = Grid::new(header());
    let mut pp_grid = Grid::new(header());
    let mut tidy = Grid::new(["country", "variable", "test", "statistic", "p_value", "stars", "details"]);
    for (c, country) in p.countries().iter().enumerate() {
        let mut adf_row = vec![country.clone()];
        let mut pp_row = vec![country.clone()];
        for (v, var) in p.variables().iter().enumerate() {
            let series = p.series(c, v);
            let label = |e: CliError| e.prefixed(&format!("({country}, {var})"));
            let adf = adf_test(series, &adf_opts).map_err(|e| label(e.into()))?;
            let pp = pp_test(series, st.deterministic).map_err(|e| label(e.into()))?;
            adf_row.push(pvalue_cell(adf.p_value));
            pp_row.push(pvalue_cell(pp.p_value));
            for (name, r) in [("adf", &adf), ("pp", &pp)] {
                let details: Vec<String> = r.nuisance.iter().map(|(k, v)| format!("{k}={v}")).collect();
                tidy.push(vec![
                    country.clone(),
                    var.clone(),
                    name.into(),
                    exact(r.statistic),
                    exact(r.p_value),
                    r.stars().into(),
                    details.join(";"),
                ]);
            }
        }
        adf_grid.push(adf_row);
        pp_grid.push(pp_row);
    }
    ctx.grid("01_stationarity_adf.csv", &adf_grid)?;
    ctx.grid("01_stationarity_pp.csv", &pp_grid)?;
    ctx.grid("01_stationarity_tests.csv", &tidy)
}

fn rollreg(ctx: &Context) -> Result<(), CliError> {
    let p = &ctx.panel;
    let window = ctx.cfg.rolling.window;
    let k = p.variables().len();
    let mut results = HashMap::new();
    let mut detail = Grid::new(["country", "x", "y", "window", "n_windows", "mean_adj_r_squared", "pooled_f_pvalue"]);
    for (c, country) in p.countries().iter().enumerate() {
        for i in 0..k {
            for j in i + 1..k {
                let r = rolling_ols(p.series(c, i), p.series(c, j), window).map_err(|e| {
                    CliError::from(e).prefixed(&format!("({country}, {} ~ {})", p.variables()[j], p.variables()[i]))
                })?;
                detail.push(vec![
                    country.clone(),
                    p.variables()[i].clone(),
                    p.variables()[j].clone(),
                    window.to_string(),
                    r.fits.len().to_string(),
                    exact(r.mean_adj_r_squared),
                    exact(r.pooled_f_pvalue),
                ]);
                results.insert((c, i, j), (r.mean_adj_r_squared, r.pooled_f_pvalue));
            }
        }
    }
    let grid = emit::upper_triangular("row \\ column", p.countries(), p.variables(), |c, i, j| {
        let (r2, pv) = results[&(c, i, j)];
        format!("{}{}", num(r2, 5), rolling_marker(pv))
    });
    ctx.grid("02_rolling_regression.csv", &grid)?;
    ctx.grid("02_rolling_detail.csv", &detail)
}

fn var(ctx: &Context) -> Result<(), CliError> {
    let p = &ctx.panel;
    let vc = &ctx.cfg.var;
    let mut header = vec!["country".to_string(), "lag".into(), "criterion".into(), "nobs".into(), "rms_pooled".into()];
    header.extend(p.variables().iter().map(|v| format!("rms_{v}")));
    header.extend(["max_modulus".to_string(), "stable".into()]);
    let mut summary = Grid::new(header);
    let mut normality = Grid::new(["country", "variable", "jarque_bera", "p_value", "marked"]);
    for (c, country) in p.countries().iter().enumerate() {
        let block = p.country_block(c);
        let prefix = |e: CliError| e.prefixed(country);
        let lag = select_lag(&block, vc.max_lag, vc.deterministic, vc.criterion).map_err(|e| prefix(e.into()))?;
        let est = estimate_var(&block, lag, vc.deterministic).map_err(|e| prefix(e.into()))?;
        let rms = residual_rms(&est);
        let moduli = var_stability(&est);
        let mut row = vec![
            country.clone(),
            lag.to_string(),
            format!("{:?}", vc.criterion).to_lowercase(),
            est.nobs.to_string(),
            num(rms.pooled, 6),
        ];
        row.extend(rms.per_equation.iter().map(|r| num(*r, 6)));
        row.push(num(moduli.first().copied().unwrap_or(0.0), 6));
        row.push(is_stable(&moduli).to_string());
        summary.push(row);
        for (v, var) in p.variables().iter().enumerate() {
            let u: Vec<f64> = est.residuals.column(v).iter().copied().collect();
            let jb =
                jarque_bera(&u).map_err(|e| CliError::from(e).prefixed(&format!("({country}, {var}) residuals")))?;
            normality.push(vec![
                country.clone(),
                var.clone(),
                exact(jb.statistic),
                exact(jb.p_value),
                pvalue_cell(jb.p_value),
            ]);
        }
    }
    ctx.grid("03_var_summary.csv", &summary)?;
    ctx.grid("03_var_normality.csv", &normality)
}

fn granger(ctx: &Context) -> Result<(), CliError> {
    let p = &ctx.panel;
    let lag = ctx.cfg.granger.lag;
    let k = p.variables().len();
    let mut pvals = HashMap::new();
    let mut detail = Grid::new(["country", "cause", "effect", "lag", "f_statistic", "p_value", "stars"]);
    for (c, country) in p.countries().iter().enumerate() {
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let (cause, effect) = (&p.variables()[i], &p.variables()[j]);
                let r = granger_test(p.series(c, i), p.series(c, j), lag)
                    .map_err(|e| CliError::from(e).prefixed(&format!("({country}, {cause} -> {effect})")))?;
                detail.push(vec![
                    country.clone(),
                    cause.clone(),
                    effect.clone(),
                    lag.to_string(),
                    exact(r.statistic),
                    exact(r.p_value),
                    r.stars().into(),
                ]);
                pvals.insert((c, i, j), r.p_value);
            }
        }
    }
    let grid = emit::upper_triangular("cause (row) \\ effect (column)", p.countries(), p.variables(), |c, i, j| {
        pvalue_cell_precise(pvals[&(c, i, j)])
    });
    ctx.grid("03_granger.csv", &grid)?;
    ctx.grid("03_granger_detail.csv", &detail)
}

fn johansen(ctx: &Context) -> Result<(), CliError> {
    let p = &ctx.panel;
    let jc = &ctx.cfg.johansen;
    let k = p.variables().len();
    let mut cells = HashMap::new();
    let mut detail = Grid::new([
        "country",
        "first",
        "second",
        "trace_r0",
        "cv90_r0",
        "cv95_r0",
        "cv99_r0",
        "trace_r1",
        "cv95_r1",
        "selected_rank",
    ]);
    for (c, country) in p.countries().iter().enumerate() {
        for i in 0..k {
            for j in i + 1..k {
                let (a, b) = (p.series(c, i), p.series(c, j));
                let data = DMatrix::from_fn(a.len(), 2, |t, col| if col == 0 { a[t] } else { b[t] });
                let r = johansen_trace(&data, jc.lag_diffs, jc.deterministic).map_err(|e| {
                    CliError::from(e).prefixed(&format!("({country}, {} & {})", p.variables()[i], p.variables()[j]))
                })?;
                detail.push(vec![
                    country.clone(),
                    p.variables()[i].clone(),
                    p.variables()[j].clone(),
                    exact(r.trace_stats[0]),
                    exact(r.critical_values[0][0]),
                    exact(r.critical_values[0][1]),
                    exact(r.critical_values[0][2]),
                    exact(r.trace_stats[1]),
                    exact(r.critical_values[1][1]),
                    r.selected_rank.to_string(),
                ]);
                cells.insert((c, i, j), format!("{}{}", num(r.trace_stats[0], 2), r.stars(0)));
            }
        }
    }
    let grid =
        emit::upper_triangular("row \\ column", p.countries(), p.variables(), |c, i, j| cells[&(c, i, j)].clone());
    ctx.grid("03_johansen.csv", &grid)?;
    ctx.grid("03_johansen_detail.csv", &detail)
}

fn gvar(ctx: &Context) -> Result<(), CliError> {
    let display = ctx.flows.normalize(WeightMode::MaxNormalized)?.restrict(ctx.panel.countries())?;
    let mut table = Grid::new(std::iter::once("from \\ to".to_string()).chain(display.countries().iter().cloned()));
    for (i, from) in display.countries().iter().enumerate() {
        let mut row = vec![from.clone()];
        for j in 0..display.len() {
            row.push(if i == j { "0".into() } else { num(display.get(i, j), 4) });
        }
        table.push(row);
    }
    ctx.grid("04_weights_table6.csv", &table)?;

    let est = estimate_gvar(&ctx.panel, &ctx.estimation_weights()?, ctx.cfg.gvar.deterministic, &ctx.stack_options())?;
    let mut buf = format!("# {}\n", ctx.provenance).into_bytes();
    write_global_model(&est.global, &mut buf)?;
    fs::write(ctx.path("04_gvar_model.txt"), buf)?;
    let moduli = est.global.solved.eigen_moduli();
    let mut g = Grid::new(["quantity", "value"]);
    g.push(vec!["countries".into(), ctx.panel.countries().len().to_string()]);
    g.push(vec!["global_variables".into(), est.global.layout.dim().to_string()]);
    g.push(vec!["condition_number_g".into(), exact(est.global.condition_number)]);
    g.push(vec!["spectral_radius".into(), exact(moduli.first().copied().unwrap_or(0.0))]);
    g.push(vec!["stable".into(), est.global.solved.is_stable().to_string()]);
    ctx.grid("04_gvar_summary.csv", &g)
}

fn bgvar(ctx: &mut Context) -> Result<(), CliError> {
    let b = &ctx.cfg.bgvar;
    let weights = ctx.estimation_weights()?;
    let mut draws = sample_posterior(
        &ctx.panel,
        &weights,
        ctx.cfg.gvar.deterministic,
        &b.prior,
        &b.schedule,
        ctx.seed("bgvar"),
        &ctx.stack_options(),
    )?;
    draws.config_hash = ctx.cfg.hash();
    let mut buf = format!("# {}\n", ctx.provenance).into_bytes();
    write_draws(&draws, &mut buf)?;
    fs::write(ctx.path(DRAWS_FILE), buf)?;

    let geweke = geweke_diag(&draws);
    let mut gz = Grid::new(["parameter", "z"]);
    for (label, z) in &geweke.scores {
        gz.push(vec![label.clone(), exact(*z)]);
    }
    ctx.grid("04_geweke.csv", &gz)?;

    let residuals = posterior_mean_residuals(&ctx.panel, &weights, &draws)?;
    let autocorr = residual_autocorr_buckets(&residuals)?;
    let corr = cross_unit_mean_abs_corr(&residuals)?;
    let corr_buckets = cross_unit_buckets(&corr);
    let summary = model_summary(
        ctx,
        &draws,
        geweke.n_exceed(),
        geweke.scores.len(),
        geweke.excluded.len(),
        &autocorr,
        &corr_buckets,
    );
    ctx.text("04_model_summary.txt", &summary)?;
    ctx.draws = Some(draws);
    Ok(())
}

fn bucket_line(labels: &[&str], counts: &[usize; 4]) -> Vec<String> {
    let total: usize = counts.iter().sum();
    labels
        .iter()
        .zip(counts)
        .map(|(l, &c)| format!("  {l:<14} {c:>5}  {:>6}%", trim_decimal(percent(c, total), 2)))
        .collect()
}

fn model_summary(
    ctx: &Context,
    draws: &PosteriorDraws,
    n_exceed: usize,
    n_scores: usize,
    n_excluded: usize,
    autocorr: &PValueBuckets,
    corr: &[CorrBuckets],
) -> String {
    let b = &ctx.cfg.bgvar;
    let n = draws.draws.len();
    let thin = draws.thin;
    let layout = &draws.layout;
    let mut lines = vec![
        "Model Info".to_string(),
        format!(
            "Prior: Normal-Gamma (theta={}, c0={}, d0={}, deterministic variance={})",
            b.prior.theta, b.prior.c0, b.prior.d0, b.prior.deterministic_variance
        ),
        "Number of lags for endogenous variables: 1".into(),
        "Number of lags for weakly exogenous variables: 1".into(),
        format!("Deterministic terms: {}", draws.deterministic),
        format!("Number of burn-ins: {}", draws.n_burn),
        format!("Number of posterior draws: {}/{}={}", n * thin, thin, n),
        format!("Number of stable posterior draws: {}", ratio(draws.n_stable(), n)),
        format!(
            "Number of cross-sectional units: {} ({} variables each, {} in total)",
            layout.n_countries(),
            layout.n_variables(),
            layout.dim()
        ),
        String::new(),
        "Convergence diagnostics".into(),
        format!(
            "Geweke statistic: {n_exceed} out of {n_scores} variables' z-values exceed the {Z_CRITICAL} threshold ({}%).",
            trim_decimal(percent(n_exceed, n_scores), 2)
        ),
    ];
    if n_excluded > 0 {
        lines.push(format!("Parameters with constant chains (not scored): {n_excluded}"));
    }
    lines.push(String::new());
    lines.push("F-test, first order serial autocorrelation of cross-unit residuals".into());
    lines.push(format!("  {:<14} {:>5}  {:>7}", "p-value", "count", "share"));
    lines.extend(bucket_line(&PValueBuckets::LABELS, &autocorr.0));
    lines.push(String::new());
    lines.push("Average pairwise cross-unit correlation of posterior-mean residuals".into());
    let mut header = format!("  {:<8}", "variable");
    for l in CorrBuckets::LABELS {
        header.push_str(&format!(" {l:>16}"));
    }
    lines.push(header);
    for (v, b) in layout.variables.iter().zip(corr) {
        let total = b.total();
        let mut row = format!("  {v:<8}");
        for &c in &b.0 {
            row.push_str(&format!(" {:>16}", format!("{c} ({}%)", trim_decimal(percent(c, total), 2))));
        }
        lines.push(row);
    }
    lines.push(String::new());
    lines.join("\n")
}

/// Draws to forecast from: the in-memory posterior or the draw file.
fn ensure_draws(ctx: &mut Context) -> Result<(), CliError> {
    if ctx.draws.is_some() {
        return Ok(());
    }
    let path = ctx.path(DRAWS_FILE);
    let file = fs::File::open(&path)
        .map_err(|e| CliError::Data(format!("{}: {e} (run the bgvar stage first)", path.display())))?;
    let draws = read_draws(BufReader::new(file), &ctx.stack_options())?;
    let layout = GlobalLayout::from_panel(&ctx.panel);
    if draws.layout != layout {
        return Err(CliError::Config(format!(
            "{} was sampled for a different country or variable selection",
            path.display()
        )));
    }
    ctx.draws = Some(draws);
    Ok(())
}

fn selected_models(ctx: &Context) -> Result<Vec<&SolvedGlobal>, CliError> {
    let draws = ctx.draws.as_ref().expect("draws loaded");
    if ctx.cfg.bgvar.stable_only {
        Ok(filter_stable(draws)?.into_iter().map(|d| &d.solved).collect())
    } else {
        Ok(draws.draws.iter().map(|d| &d.solved).collect())
    }
}

fn file_token(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

/// Quantile table `label, horizon, q05 … q95` for every global variable.
fn quantile_grid(layout: &GlobalLayout, bands: &[DMatrix<f64>], h0: usize, map: impl Fn(usize, f64) -> f64) -> Grid {
    let mut g = Grid::new(["label", "horizon", "q05", "q16", "q50", "q84", "q95"]);
    for i in 0..layout.dim() {
        let (c, v) = layout.label(i);
        for h in 0..bands[0].nrows() {
            let mut row = vec![format!("{c}/{v}"), (h + h0).to_string()];
            row.extend(bands.iter().map(|q| exact(map(i, q[(h, i)]))));
            g.push(row);
        }
    }
    g
}

fn fan_panels(
    ctx: &Context,
    layout: &GlobalLayout,
    bands: &[DMatrix<f64>],
    v: usize,
    x0: i64,
    history: bool,
    map: &impl Fn(usize, f64) -> f64,
) -> Vec<ChartPanel> {
    let n_hist = if history { ctx.cfg.forecast.history.min(ctx.panel.n_periods()) } else { 0 };
    layout
        .countries
        .iter()
        .enumerate()
        .map(|(c, country)| {
            let i = layout.index(c, v);
            let series = ctx.panel.series(c, v);
            ChartPanel {
                title: format!("{country} {}", layout.variables[v]),
                x0,
                history: series[series.len() - n_hist..].iter().map(|x| map(i, *x)).collect(),
                bands: (0..bands[0].nrows()).map(|h| std::array::from_fn(|q| map(i, bands[q][(h, i)]))).collect(),
            }
        })
        .collect()
}

fn forecasts(ctx: &mut Context) -> Result<(), CliError> {
    ensure_draws(ctx)?;
    let models = selected_models(ctx)?;
    let layout = GlobalLayout::from_panel(&ctx.panel);
    let data = global_data(&ctx.panel);
    let t_last = data.nrows() - 1;
    let x_last: DVector<f64> = data.row(t_last).transpose();
    let fc = &ctx.cfg.forecast;
    let exp_vars: Vec<bool> = layout.variables.iter().map(|v| ctx.exp_display(v)).collect();
    let kv = layout.n_variables();
    let map = |i: usize, x: f64| if exp_vars[i % kv] { x.exp() } else { x };
    let (chart_v, chart_name) = ctx.chart_variable()?;

    let mut scenarios = vec![("unconditional".to_string(), Vec::new(), "Unconditional forecast".to_string())];
    for s in &fc.scenarios {
        let index = layout.find(&s.country, &s.variable).ok_or_else(|| {
            CliError::Config(format!("scenario '{}': ({}, {}) is not a model variable", s.name, s.country, s.variable))
        })?;
        let value = s.value.unwrap_or(x_last[index]);
        let half_width = if s.half_width_pct == 0.0 {
            0.0
        } else if exp_vars[index % kv] {
            (1.0 + s.half_width_pct / 100.0).ln()
        } else {
            value.abs() * s.half_width_pct / 100.0
        };
        let constraints = (1..=fc.n_ahead).map(|horizon| Constraint { index, horizon, value, half_width }).collect();
        let title = if half_width > 0.0 {
            format!("{} {} held within ±{}% of {}", s.country, s.variable, s.half_width_pct, exact(map(index, value)))
        } else {
            format!("{} {} fixed at {}", s.country, s.variable, exact(map(index, value)))
        };
        scenarios.push((s.name.clone(), constraints, title));
    }
    for (name, constraints, title) in scenarios {
        let spec = ForecastSpec {
            n_ahead: fc.n_ahead,
            shocks: ShockMode::Simulated,
            constraints,
            seed: ctx.seed(&format!("forecast/{name}")),
        };
        let paths = forecast(&models, &x_last, t_last, &spec).map_err(|e| CliError::from(e).prefixed(&name))?;
        let bands = paths.quantiles(&LEVELS);
        let stem = format!("05_forecast_{}", file_token(&name));
        ctx.grid(&format!("{stem}.csv"), &quantile_grid(&layout, &bands, 1, map))?;
        let panels = fan_panels(ctx, &layout, &bands, chart_v, 1, true, &map);
        let opts = ChartOptions {
            title: format!("{title}: {chart_name}, {} draws", models.len()),
            x_label: "periods after the last observation".into(),
            zero_line: false,
        };
        emit::write_text(&ctx.path(&format!("{stem}.svg")), &chart::render(&panels, &opts, &ctx.provenance))?;
    }
    Ok(())
}

fn girf(ctx: &mut Context) -> Result<(), CliError> {
    let gc = ctx.cfg.girf.clone();
    if gc.shock_country.is_empty() {
        return Ok(());
    }
    ensure_draws(ctx)?;
    let models = selected_models(ctx)?;
    let layout = GlobalLayout::from_panel(&ctx.panel);
    let shock = layout.find(&gc.shock_country, &gc.shock_variable).ok_or_else(|| {
        CliError::Config(format!("girf shock ({}, {}) is not a model variable", gc.shock_country, gc.shock_variable))
    })?;
    let responses = girf_draws(&models, shock, gc.horizon)?;
    let bands = pointwise_quantiles(&responses, &LEVELS);
    let stem = format!("05_girf_{}_{}", file_token(&gc.shock_country), file_token(&gc.shock_variable));
    let identity = |_: usize, x: f64| x;
    ctx.grid(&format!("{stem}.csv"), &quantile_grid(&layout, &bands, 0, identity))?;
    let (chart_v, chart_name) = ctx.chart_variable()?;
    let panels = fan_panels(ctx, &layout, &bands, chart_v, 0, false, &identity);
    let opts = ChartOptions {
        title: format!(
            "Response of {chart_name} to a one standard deviation shock in {} {}",
            gc.shock_country, gc.shock_variable
        ),
        x_label: "horizon".into(),
        zero_line: true,
    };
    emit::write_text(&ctx.path(&format!("{stem}.svg")), &chart::render(&panels, &opts, &ctx.provenance))
}

/// Files of a finished bundle, sorted by name.
pub fn bundle_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    files.retain(|p| p.is_file());
    files.sort();
    Ok(files)
}
