use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

use super::config::Format;
use super::run::ResultBundle;

/// Shortest round-trip form, switching to exponent notation for very small or
/// very large magnitudes.
fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Quotes a CSV field when needed.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `series,t,branch,lambda` rows, then an index summary block when the
/// bundle holds integers.
pub fn to_csv(bundle: &ResultBundle) -> String {
    let mut out = String::from("series,t,branch,lambda\n");
    for (label, set) in bundle.branch_sets() {
        for (j, branch) in set.branches.iter().enumerate() {
            for (t, l) in branch {
                let _ = writeln!(out, "{},{},{j},{}", field(&label), num(*t), num(*l));
            }
        }
    }
    if !bundle.integers.is_empty() {
        out.push_str("\nindex,value,raw,residual\n");
        for r in &bundle.integers {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                field(&r.label),
                r.value,
                num(r.raw),
                num(r.residual)
            );
        }
    }
    out
}

/// Two-column blocks separated by blank lines: branch curves `(t, λ)` then
/// unwrapped `arg det 𝒰` traces `(t, φ)`.
pub fn to_plotdata(bundle: &ResultBundle) -> String {
    let mut out = String::new();
    for (label, set) in bundle.branch_sets() {
        for (j, branch) in set.branches.iter().enumerate() {
            let _ = writeln!(out, "# branch {label} {j}");
            for (t, l) in branch {
                let _ = writeln!(out, "{} {}", num(*t), num(*l));
            }
            out.push_str("\n\n");
        }
    }
    for (label, r) in bundle.index_reports() {
        let _ = writeln!(out, "# phase {label}");
        for (t, p) in &r.phase_trace {
            let _ = writeln!(out, "{} {}", num(*t), num(*p));
        }
        out.push_str("\n\n");
    }
    out
}

pub fn render(bundle: &ResultBundle, format: Format) -> Result<String> {
    Ok(match format {
        Format::Csv => to_csv(bundle),
        Format::Json => bundle.to_json()? + "\n",
        Format::Plotdata => to_plotdata(bundle),
    })
}

/// Renders and writes to `path`, or returns the text for stdout.
pub fn emit(bundle: &ResultBundle, format: Format, path: Option<&Path>) -> Result<String> {
    let text = render(bundle, format)?;
    if let Some(p) = path {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(p, &text)?;
    }
    Ok(text)
}
