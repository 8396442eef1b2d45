use std::path::Path;

use barnorm::relaxation::BoundTrace;

use crate::CliError;

pub const HEADER: [&str; 5] = ["n", "rho_lo", "rho_hi", "gamma", "vertices"];

/// Header plus one row per iteration; floats carry 17 significant digits.
pub fn render_csv(trace: &BoundTrace) -> String {
    let mut w = ::csv::WriterBuilder::new().terminator(::csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for r in trace.rows() {
        w.write_record([
            r.n.to_string(),
            format!("{:.16e}", r.rho_lo),
            format!("{:.16e}", r.rho_hi),
            format!("{:.16e}", r.gamma),
            r.vertices.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn emit_csv(trace: &BoundTrace, path: &Path) -> Result<(), CliError> {
    if trace.is_empty() {
        return Err(CliError::Usage("no bound trace to write".into()));
    }
    crate::write_file(path, &render_csv(trace))
}
