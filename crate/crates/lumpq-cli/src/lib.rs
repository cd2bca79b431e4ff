//! Argument parsing and plotting helpers for the `lumpq` command line tool.
//! Kept in a library target so the grammar of the user-facing mini-formats
//! (ε grids, λ lists, method lists) can be tested and fuzzed directly.

use num_complex::Complex64;

use lumpq::generate::GeneratorClass;
use lumpq::invariance::SpectralShift;
use lumpq::methods::MethodKind;
use lumpq::{Error, Result};

/// Parses an epsilon grid: either a single value `0.5` or an inclusive range
/// `start:stop:step`.
pub fn parse_eps_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::InvalidConfig(format!("epsilon grid `{s}`: {msg}"));
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [one] => {
            let v: f64 = one.trim().parse().map_err(|_| bad("not a number"))?;
            vec![v]
        }
        [start, stop, step] => {
            let start: f64 = start.trim().parse().map_err(|_| bad("bad start"))?;
            let stop: f64 = stop.trim().parse().map_err(|_| bad("bad stop"))?;
            let step: f64 = step.trim().parse().map_err(|_| bad("bad step"))?;
            if !step.is_finite() || step <= 0.0 {
                return Err(bad("step must be positive"));
            }
            if !start.is_finite() || !stop.is_finite() || stop < start {
                return Err(bad("need start <= stop"));
            }
            if (stop - start) / step > 10_000.0 {
                return Err(bad("more than 10000 grid points"));
            }
            let mut grid = Vec::new();
            let mut i = 0usize;
            loop {
                // round accumulated values back onto the decimal grid the
                // user wrote, so 0.1 + 2*0.1 prints as 0.3 in the CSV
                let v = ((start + i as f64 * step) * 1e9).round() / 1e9;
                if v > stop + 1e-12 {
                    break;
                }
                grid.push(v);
                i += 1;
            }
            grid
        }
        _ => return Err(bad("expected `value` or `start:stop:step`")),
    };
    if grid.is_empty() {
        return Err(bad("empty grid"));
    }
    for &v in &grid {
        if !(0.0..=1.0).contains(&v) {
            return Err(bad("values must lie in [0, 1]"));
        }
    }
    Ok(grid)
}

/// Parses a λ override list: `re,im[;re,im...]`.
pub fn parse_lambda_list(s: &str) -> Result<Vec<SpectralShift>> {
    let bad = |msg: String| Error::InvalidParameter(format!("lambda list `{s}`: {msg}"));
    let mut shifts = Vec::new();
    for group in s.split(';') {
        let group = group.trim();
        if group.is_empty() {
            return Err(bad("empty entry".into()));
        }
        let nums: Vec<&str> = group.split(',').collect();
        if nums.len() != 2 {
            return Err(bad(format!("`{group}` is not `re,im`")));
        }
        let re: f64 = nums[0]
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad real part `{}`", nums[0])))?;
        let im: f64 = nums[1]
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad imaginary part `{}`", nums[1])))?;
        shifts.push(SpectralShift::new(Complex64::new(re, im))?);
    }
    Ok(shifts)
}

/// Parses a comma-separated method list. The shorthand `q` expands to the
/// class-appropriate Q pipeline: `Q(1)` for the block-diagonal families and
/// the random-shift search for block-stochastic instances.
pub fn parse_methods(s: &str, class: GeneratorClass) -> Result<Vec<MethodKind>> {
    let mut methods = Vec::new();
    for tok in s.split(',') {
        let tok = tok.trim();
        let m = if tok == "q" {
            match class {
                GeneratorClass::BlockDiag | GeneratorClass::SparseMasked => {
                    MethodKind::QMetastable
                }
                GeneratorClass::BlockStoch => MethodKind::QGeneral,
            }
        } else {
            MethodKind::parse(tok)?
        };
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no methods given".into()));
    }
    Ok(methods)
}

fn svg_escape_axis(points: &[(f64, f64)], width: f64, height: f64) -> (f64, f64, f64, f64) {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in points {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let pad = 0.1;
    let dx = (xmax - xmin).max(1e-9);
    let dy = (ymax - ymin).max(1e-9);
    let sx = (width * (1.0 - 2.0 * pad)) / dx;
    let sy = (height * (1.0 - 2.0 * pad)) / dy;
    (xmin - pad * dx / (1.0 - 2.0 * pad), ymin - pad * dy / (1.0 - 2.0 * pad), sx, sy)
}

/// Minimal static scatter of a spectrum in the complex plane, with the unit
/// circle for reference; optionally a second panel of Q(λ) eigenvalues by
/// ascending index.
pub fn spectrum_svg(eigs: &[(f64, f64)], q_eigs: Option<&[f64]>) -> String {
    let panel = 360.0;
    let panels = if q_eigs.is_some() { 2.0 } else { 1.0 };
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        panel * panels,
        panel,
        panel * panels,
        panel
    ));
    // complex-plane panel, fixed window [-1.1, 1.1]^2
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        let s = panel / 2.2;
        ((x + 1.1) * s, (1.1 - y) * s)
    };
    let (cx, cy) = to_px(0.0, 0.0);
    out.push_str(&format!(
        "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{:.2}\" fill=\"none\" stroke=\"#bbbbbb\"/>\n",
        panel / 2.2
    ));
    out.push_str(&format!(
        "<line x1=\"0\" y1=\"{cy:.2}\" x2=\"{panel:.2}\" y2=\"{cy:.2}\" stroke=\"#dddddd\"/>\n"
    ));
    out.push_str(&format!(
        "<line x1=\"{cx:.2}\" y1=\"0\" x2=\"{cx:.2}\" y2=\"{panel:.2}\" stroke=\"#dddddd\"/>\n"
    ));
    for &(re, im) in eigs {
        let (x, y) = to_px(re.clamp(-1.1, 1.1), im.clamp(-1.1, 1.1));
        out.push_str(&format!(
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"#1f6fb2\" fill-opacity=\"0.8\"/>\n"
        ));
    }
    if let Some(mu) = q_eigs {
        let pts: Vec<(f64, f64)> = mu.iter().enumerate().map(|(i, &m)| (i as f64, m)).collect();
        let (x0, y0, sx, sy) = svg_escape_axis(&pts, panel, panel);
        for &(ix, m) in &pts {
            let x = panel + (ix - x0) * sx;
            let y = panel - (m - y0) * sy;
            out.push_str(&format!(
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.5\" fill=\"#b23a1f\" fill-opacity=\"0.8\"/>\n"
            ));
        }
        out.push_str(&format!(
            "<line x1=\"{panel}\" y1=\"0\" x2=\"{panel}\" y2=\"{panel}\" stroke=\"#888888\"/>\n"
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_grid_single_and_range() {
        assert_eq!(parse_eps_grid("0.5").unwrap(), vec![0.5]);
        let g = parse_eps_grid("0.1:0.9:0.1").unwrap();
        assert_eq!(g.len(), 9);
        assert!((g[0] - 0.1).abs() < 1e-12);
        assert!((g[8] - 0.9).abs() < 1e-12);
        assert_eq!(parse_eps_grid("0.0:1.0:0.5").unwrap().len(), 3);
    }

    #[test]
    fn eps_grid_rejects_garbage() {
        assert!(parse_eps_grid("").is_err());
        assert!(parse_eps_grid("a").is_err());
        assert!(parse_eps_grid("0.1:0.9").is_err());
        assert!(parse_eps_grid("0.9:0.1:0.1").is_err());
        assert!(parse_eps_grid("0.1:0.9:-0.1").is_err());
        assert!(parse_eps_grid("0.1:1.9:0.1").is_err());
        assert!(parse_eps_grid("1.2").is_err());
    }

    #[test]
    fn lambda_list_parses_pairs() {
        let l = parse_lambda_list("1,0;0.25,0").unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(l[0].value(), Complex64::new(1.0, 0.0));
        assert_eq!(l[1].value(), Complex64::new(0.25, 0.0));
        assert!(parse_lambda_list("1").is_err());
        assert!(parse_lambda_list("1,0;;").is_err());
        assert!(parse_lambda_list("nan,0").is_err());
    }

    #[test]
    fn method_shorthand_tracks_class() {
        let m = parse_methods("q,svd", GeneratorClass::BlockDiag).unwrap();
        assert_eq!(m, vec![MethodKind::QMetastable, MethodKind::Svd]);
        let m = parse_methods("q", GeneratorClass::BlockStoch).unwrap();
        assert_eq!(m, vec![MethodKind::QGeneral]);
        assert!(parse_methods("nope", GeneratorClass::BlockDiag).is_err());
    }

    #[test]
    fn svg_is_wellformed_enough() {
        let svg = spectrum_svg(&[(1.0, 0.0), (0.1, 0.2)], Some(&[0.0, 0.5, 1.0]));
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 2 + 3 + 1);
    }
}
