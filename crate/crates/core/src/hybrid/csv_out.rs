use std::io::Write;

use super::HybridArc;
use crate::error::{LabError, Result};

fn csv_err(e: csv::Error) -> LabError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => LabError::Io(io),
        other => LabError::Numerical(format!("csv: {other:?}")),
    }
}

pub fn arc_header(arc: &HybridArc) -> Vec<String> {
    let mut cols = vec!["t".to_string(), "i".to_string()];
    cols.extend((1..=arc.n).map(|k| format!("x{k}")));
    let zlen = arc.samples().next().map_or(0, |s| s.state.z.len());
    cols.extend((0..zlen).map(|k| format!("z{k}")));
    cols.push("s".into());
    cols.push("mu".into());
    for r in 1..=arc.p {
        for c in 1..=arc.p {
            cols.push(format!("R{r}{c}"));
        }
    }
    cols.push("e_norm".into());
    cols.push("phi_converged".into());
    cols
}

/// One row per recorded sample; jump instants appear twice, once per
/// hybrid index. `e_norm` is empty for loops without an observer.
pub fn write_arc_csv<W: Write>(arc: &HybridArc, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(arc_header(arc)).map_err(csv_err)?;
    for s in arc.samples() {
        let st = &s.state;
        let mut row = vec![s.t.to_string(), s.i.to_string()];
        row.extend(st.x.iter().map(f64::to_string));
        row.extend(st.z.iter().map(f64::to_string));
        row.push(st.s.to_string());
        row.push(st.mu.to_string());
        for r in 0..arc.p {
            for c in 0..arc.p {
                row.push(st.r[(r, c)].to_string());
            }
        }
        row.push(s.e_norm.map_or_else(String::new, |e| e.to_string()));
        row.push(u8::from(s.phi_converged).to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
