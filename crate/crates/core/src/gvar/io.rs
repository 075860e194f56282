use std::io::{BufRead, Write};

use super::{GlobalLayout, GlobalModel, GvarError, SolvedGlobal};
use crate::textio::{check_name, write_matrix, write_vector, LineReader, TextError};

const MAGIC: &str = "gvar-model\t1";

impl From<TextError> for GvarError {
    fn from(e: TextError) -> Self {
        match e {
            TextError::Io(e) => GvarError::Io(e),
            TextError::Parse { line, message } => GvarError::Parse { line, message },
        }
    }
}

/// Write a solved global model as text: a tab-separated header with the
/// country and variable order, then the structural and reduced-form blocks.
pub fn write_global_model<W: Write>(model: &GlobalModel, mut w: W) -> Result<(), GvarError> {
    for n in model.layout.countries.iter().chain(&model.layout.variables) {
        check_name(n).map_err(GvarError::Config)?;
    }
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "countries\t{}", model.layout.countries.join("\t"))?;
    writeln!(w, "variables\t{}", model.layout.variables.join("\t"))?;
    writeln!(w, "condition\t{:e}", model.condition_number)?;
    write_matrix(&mut w, "G", &model.g)?;
    write_matrix(&mut w, "H", &model.h)?;
    write_vector(&mut w, "a0", &model.a0)?;
    write_vector(&mut w, "a1", &model.a1)?;
    write_matrix(&mut w, "sigma_eps", &model.sigma_eps)?;
    write_vector(&mut w, "b0", &model.solved.b0)?;
    write_vector(&mut w, "b1", &model.solved.b1)?;
    write_matrix(&mut w, "F", &model.solved.f)?;
    write_matrix(&mut w, "sigma_e", &model.solved.sigma_e)?;
    Ok(())
}

pub fn read_global_model<R: BufRead>(r: R) -> Result<GlobalModel, GvarError> {
    let mut r = LineReader::new(r);
    // Leading `#` lines carry provenance and are skipped.
    let mut first = r.expect_line()?;
    while first.starts_with('#') {
        first = r.expect_line()?;
    }
    if first != MAGIC {
        return Err(r.error("not a gvar-model file").into());
    }
    let countries = r.expect_fields("countries")?;
    let variables = r.expect_fields("variables")?;
    let layout = GlobalLayout::new(countries, variables)?;
    let condition_number = r.expect_value("condition")?;
    let k = layout.dim();
    let g = r.expect_matrix("G")?;
    let h = r.expect_matrix("H")?;
    let a0 = r.expect_vector("a0")?;
    let a1 = r.expect_vector("a1")?;
    let sigma_eps = r.expect_matrix("sigma_eps")?;
    let b0 = r.expect_vector("b0")?;
    let b1 = r.expect_vector("b1")?;
    let f = r.expect_matrix("F")?;
    let sigma_e = r.expect_matrix("sigma_e")?;
    let square = [&g, &h, &sigma_eps, &f, &sigma_e].iter().all(|m| m.shape() == (k, k));
    let vectors = [&a0, &a1, &b0, &b1].iter().all(|v| v.len() == k);
    if !(square && vectors) {
        return Err(GvarError::Parse { line: r.line(), message: format!("blocks do not match dimension {k}") });
    }
    Ok(GlobalModel { layout, g, h, a0, a1, sigma_eps, condition_number, solved: SolvedGlobal { b0, b1, f, sigma_e } })
}
