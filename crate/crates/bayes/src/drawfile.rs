//! Text serialization of posterior draws.
//!
//! A header (seed, configuration hash, layout, schedule and link matrices)
//! is followed by one block per retained draw holding every country's
//! coefficients and residual covariance. Reading re-solves each draw's
//! global system, which reproduces the original values bit for bit.

use std::io::{BufRead, Write};

use bgvar_core::gvar::{GlobalLayout, LinkMatrix, StackOptions};
use bgvar_core::textio::{check_name, write_matrix, write_vector, LineReader, TextError};
use bgvar_core::Deterministic;

use crate::sampler::{assemble, CountryDraw, PosteriorDraws};
use crate::BayesError;

const MAGIC: &str = "bgvar-draws\t1";

impl From<TextError> for BayesError {
    fn from(e: TextError) -> Self {
        match e {
            TextError::Io(e) => BayesError::Io(e),
            TextError::Parse { line, message } => BayesError::Parse { line, message },
        }
    }
}

pub fn write_draws<W: Write>(draws: &PosteriorDraws, mut w: W) -> Result<(), BayesError> {
    for name in draws.layout.countries.iter().chain(&draws.layout.variables) {
        check_name(name).map_err(BayesError::Config)?;
    }
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "seed\t{}", draws.seed)?;
    writeln!(w, "config_hash\t{}", draws.config_hash)?;
    writeln!(w, "deterministic\t{}", draws.deterministic)?;
    writeln!(w, "countries\t{}", draws.layout.countries.join("\t"))?;
    writeln!(w, "variables\t{}", draws.layout.variables.join("\t"))?;
    writeln!(w, "n_burn\t{}", draws.n_burn)?;
    writeln!(w, "thin\t{}", draws.thin)?;
    writeln!(w, "n_draws\t{}", draws.draws.len())?;
    for link in &draws.links {
        writeln!(w, "link\t{}", link.country)?;
        write_matrix(&mut w, "w", &link.w)?;
    }
    for (d, draw) in draws.draws.iter().enumerate() {
        writeln!(w, "draw\t{d}")?;
        for (name, c) in draws.layout.countries.iter().zip(&draw.countries) {
            writeln!(w, "country\t{name}")?;
            write_vector(&mut w, "a0", &c.a0)?;
            write_vector(&mut w, "a1", &c.a1)?;
            write_matrix(&mut w, "psi", &c.psi)?;
            write_matrix(&mut w, "lambda0", &c.lambda0)?;
            write_matrix(&mut w, "lambda1", &c.lambda1)?;
            write_matrix(&mut w, "sigma", &c.sigma)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_deterministic(s: &str) -> Option<Deterministic> {
    [Deterministic::None, Deterministic::Constant, Deterministic::ConstantTrend].into_iter().find(|d| d.as_str() == s)
}

pub fn read_draws<R: BufRead>(r: R, opts: &StackOptions) -> Result<PosteriorDraws, BayesError> {
    let mut r = LineReader::new(r);
    // Leading `#` lines carry provenance and are skipped.
    let mut first = r.expect_line()?;
    while first.starts_with('#') {
        first = r.expect_line()?;
    }
    if first != MAGIC {
        return Err(r.error("not a posterior draw file").into());
    }
    let seed: u64 = r.expect_value("seed")?;
    let config_hash = r.expect_fields("config_hash")?.join("\t");
    let det_name: String = r.expect_value("deterministic")?;
    let det =
        parse_deterministic(&det_name).ok_or_else(|| r.error(format!("unknown deterministic terms '{det_name}'")))?;
    let countries = r.expect_fields("countries")?;
    let variables = r.expect_fields("variables")?;
    let layout = GlobalLayout::new(countries, variables).map_err(|e| r.error(e.to_string()))?;
    let n_burn: usize = r.expect_value("n_burn")?;
    let thin: usize = r.expect_value("thin")?;
    let n_draws: usize = r.expect_value("n_draws")?;
    let mut links = Vec::with_capacity(layout.n_countries());
    for name in &layout.countries {
        let got: String = r.expect_value("link")?;
        if &got != name {
            return Err(r.error(format!("expected link for '{name}', found '{got}'")).into());
        }
        links.push(LinkMatrix { country: name.clone(), w: r.expect_matrix("w")? });
    }
    let mut draws = Vec::with_capacity(n_draws);
    for d in 0..n_draws {
        let idx: usize = r.expect_value("draw")?;
        if idx != d {
            return Err(r.error(format!("expected draw {d}, found {idx}")).into());
        }
        let mut countries = Vec::with_capacity(layout.n_countries());
        for name in &layout.countries {
            let got: String = r.expect_value("country")?;
            if &got != name {
                return Err(r.error(format!("expected country '{name}', found '{got}'")).into());
            }
            countries.push(CountryDraw {
                a0: r.expect_vector("a0")?,
                a1: r.expect_vector("a1")?,
                psi: r.expect_matrix("psi")?,
                lambda0: r.expect_matrix("lambda0")?,
                lambda1: r.expect_matrix("lambda1")?,
                sigma: r.expect_matrix("sigma")?,
            });
        }
        let line = r.line();
        let draw = assemble(&layout, det, &links, countries, opts)
            .map_err(|e| BayesError::Parse { line, message: format!("draw {d}: {e}") })?;
        draws.push(draw);
    }
    if r.next_line()?.is_some() {
        return Err(r.error("trailing content after the last draw").into());
    }
    Ok(PosteriorDraws { layout, deterministic: det, links, seed, n_burn, thin, config_hash, draws })
}
