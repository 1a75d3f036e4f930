//! Ruler figures: the interval `[-1, 1]` cut into `prod p_j` cells, with
//! tick heights graded by mixed-radix depth and one dot per node.

use std::fmt::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::QuadratureFormula;
use crate::error::{Error, Result};

pub const FIGURE_CAP: u128 = 100_000;

/// Text figures use one column per 1/64, so `[-1, 1]` spans 129 columns.
pub const TEXT_COLUMNS: usize = 129;

const LABEL_LIMIT: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureFormat {
    Svg,
    Text,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tick {
    pub position: BigRational,
    /// Number of trailing zero digits of the tick number in the mixed radix
    /// `(p_1, ..., p_n)`; the two ends get depth `n`.
    pub depth: usize,
}

impl Tick {
    pub fn height(&self, n: usize) -> f64 {
        0.2 + 0.3 * self.depth as f64 / n as f64
    }
}

/// Ticks at `-1 + 2m/N`, `m = 0..=N`, `N = prod p_j`.
pub fn ticks(bases: &[u32]) -> Vec<Tick> {
    let total: u64 = bases.iter().map(|&p| p as u64).product();
    let n = bases.len();
    (0..=total)
        .map(|m| {
            let depth = if m == 0 || m == total {
                n
            } else {
                let mut rest = m;
                let mut d = 0;
                for &p in bases.iter().rev() {
                    if rest % p as u64 != 0 {
                        break;
                    }
                    rest /= p as u64;
                    d += 1;
                }
                d
            };
            let position = BigRational::new(
                BigInt::from(2 * m as i64 - total as i64),
                BigInt::from(total),
            );
            Tick { position, depth }
        })
        .collect()
}

fn check_cap(qf: &QuadratureFormula) -> Result<()> {
    let count = qf.spec.count();
    if count > FIGURE_CAP {
        return Err(Error::SizeCap {
            what: "figure nodes",
            requested: count,
            cap: FIGURE_CAP,
        });
    }
    Ok(())
}

fn coord(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn label(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// SVG 1.1 document in ruler units: `[-1, 1]` maps to `[-4, 4]`, heights
/// point up.
pub fn emit_svg(qf: &QuadratureFormula) -> Result<String> {
    check_cap(qf)?;
    let n = qf.spec.len();
    let ticks = ticks(qf.spec.bases());
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    s.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         viewBox=\"-4.25 -1.25 8.5 1.5\" width=\"850\" height=\"150\">\n",
    );
    s.push_str("<g stroke=\"black\" stroke-width=\"0.02\" fill=\"none\">\n");
    s.push_str("<line x1=\"-4.000000\" y1=\"0.000000\" x2=\"4.000000\" y2=\"0.000000\"/>\n");
    for t in &ticks {
        let x = coord(4.0 * t.position.to_f64().unwrap_or(0.0));
        let h = coord(-t.height(n));
        let _ = writeln!(s, "<line x1=\"{x}\" y1=\"0.000000\" x2=\"{x}\" y2=\"{h}\"/>");
    }
    s.push_str("</g>\n<g fill=\"black\">\n");
    for node in &qf.nodes {
        let x = coord(4.0 * node.value.to_f64());
        let _ = writeln!(s, "<circle cx=\"{x}\" cy=\"0.000000\" r=\"0.06\"/>");
    }
    s.push_str("</g>\n");
    if ticks.len() <= LABEL_LIMIT + 1 {
        s.push_str("<g font-family=\"serif\" font-size=\"0.22\" text-anchor=\"middle\">\n");
        for t in &ticks {
            let x = coord(4.0 * t.position.to_f64().unwrap_or(0.0));
            let y = coord(-(t.height(n) + 0.15));
            let _ = writeln!(s, "<text x=\"{x}\" y=\"{y}\">{}</text>", label(&t.position));
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Column of `x` in a text figure.
pub fn text_column(x: f64) -> usize {
    let c = ((x + 1.0) * 64.0).round();
    c.clamp(0.0, (TEXT_COLUMNS - 1) as f64) as usize
}

/// Plain-text figure: `n + 1` tick rows (a tick of depth `d` reaches rows
/// `0..=d` counted from the bottom), a baseline with `+` at every tick and a
/// dot row with `o` at every node.
pub fn emit_text(qf: &QuadratureFormula) -> Result<String> {
    check_cap(qf)?;
    let n = qf.spec.len();
    let ticks = ticks(qf.spec.bases());
    let cols: Vec<(usize, usize)> = ticks
        .iter()
        .map(|t| (text_column(t.position.to_f64().unwrap_or(0.0)), t.depth))
        .collect();
    let mut out = String::new();
    for level in (0..=n).rev() {
        let mut row = vec![b' '; TEXT_COLUMNS];
        for &(c, d) in &cols {
            if d >= level {
                row[c] = b'|';
            }
        }
        out.push_str(String::from_utf8(row).expect("ascii").trim_end());
        out.push('\n');
    }
    let mut base = vec![b'-'; TEXT_COLUMNS];
    for &(c, _) in &cols {
        base[c] = b'+';
    }
    out.push_str(&String::from_utf8(base).expect("ascii"));
    out.push('\n');
    let mut dots = vec![b' '; TEXT_COLUMNS];
    for node in &qf.nodes {
        dots[text_column(node.value.to_f64())] = b'o';
    }
    out.push_str(String::from_utf8(dots).expect("ascii").trim_end());
    out.push('\n');
    Ok(out)
}

pub fn emit_figure(qf: &QuadratureFormula, format: FigureFormat) -> Result<String> {
    match format {
        FigureFormat::Svg => emit_svg(qf),
        FigureFormat::Text => emit_text(qf),
    }
}
