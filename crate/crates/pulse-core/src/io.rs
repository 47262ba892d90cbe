//! CSV and SVG artifacts. Numbers use the shortest representation that parses back
//! to the same f64.

use std::io::{Read, Write};

use crate::classify::{BoundaryPoint, PhaseCell, ScatterLabel};
use crate::error::{Error, Result};
use crate::hybrid::Snapshot;
use crate::model::Heterogeneity;
use crate::reduced_ode::{InterfaceState, Trajectory};

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

fn flush<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush()?;
    Ok(())
}

pub fn write_trajectory<W: Write>(traj: &Trajectory, w: W) -> Result<()> {
    let mut out = writer(w, &["t", "l1", "l2", "r1", "r2", "h"])?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        out.write_record([*t, s.l1, s.l2, s.r1, s.r2, s.h()].map(fmt_f64))?;
    }
    flush(out)
}

pub fn read_trajectory<R: Read>(r: R) -> Result<Trajectory> {
    let mut rd = csv::Reader::from_reader(r);
    let mut traj = Trajectory::new();
    for rec in rd.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Io(format!("bad trajectory field {i} in {rec:?}")))
        };
        traj.push(f(0)?, InterfaceState::new(f(2)?, f(1)?, f(4)?, f(3)?));
    }
    Ok(traj)
}

pub fn write_events<W: Write>(traj: &Trajectory, w: W) -> Result<()> {
    let mut out = writer(w, &["t", "kind", "position"])?;
    for e in &traj.events {
        out.write_record([fmt_f64(e.t), e.kind.as_str().to_string(), fmt_f64(e.position)])?;
    }
    flush(out)
}

pub fn write_phase<W: Write>(cells: &[PhaseCell], w: W) -> Result<()> {
    let mut out = writer(w, &["d0", "eps0", "label"])?;
    for c in cells {
        out.write_record([fmt_f64(c.d0), fmt_f64(c.eps0), c.outcome.label.to_string()])?;
    }
    flush(out)
}

pub fn read_phase<R: Read>(r: R) -> Result<Vec<(f64, f64, ScatterLabel)>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut rows = vec![];
    for rec in rd.records() {
        let rec = rec?;
        let bad = || Error::Io(format!("bad phase row {rec:?}"));
        let num = |i: usize| rec.get(i).and_then(|s| s.parse::<f64>().ok()).ok_or_else(bad);
        let label = rec.get(2).and_then(ScatterLabel::parse).ok_or_else(bad)?;
        rows.push((num(0)?, num(1)?, label));
    }
    Ok(rows)
}

/// Residence samples at one bump width: `d0,eps0,label,residence` (`nan` when the pulse never entered).
pub fn write_residence<W: Write>(d0: f64, rows: &[(f64, ScatterLabel, Option<f64>)], w: W) -> Result<()> {
    let mut out = writer(w, &["d0", "eps0", "label", "residence"])?;
    for (e, l, t) in rows {
        out.write_record([fmt_f64(d0), fmt_f64(*e), l.to_string(), t.map_or("nan".into(), fmt_f64)])?;
    }
    flush(out)
}

pub fn write_boundaries<W: Write>(points: &[BoundaryPoint], w: W) -> Result<()> {
    let mut out = writer(w, &["d0", "eps_star", "kind"])?;
    for b in points {
        out.write_record([fmt_f64(b.d0), fmt_f64(b.eps_star), b.kind.clone()])?;
    }
    flush(out)
}

/// `x,<names...>` for a field snapshot.
pub fn write_snapshot<W: Write>(snap: &Snapshot, names: &[&str], w: W) -> Result<()> {
    let mut header = vec!["x"];
    header.extend_from_slice(names);
    let mut out = writer(w, &header)?;
    for (i, x) in snap.x.iter().enumerate() {
        let mut row = vec![fmt_f64(*x)];
        row.extend(snap.columns.iter().map(|c| fmt_f64(c[i])));
        out.write_record(&row)?;
    }
    flush(out)
}

/// Key-value report as `key,value` rows.
pub fn write_report<W: Write>(rows: &[(String, String)], w: W) -> Result<()> {
    let mut out = writer(w, &["key", "value"])?;
    for (k, v) in rows {
        out.write_record([k, v])?;
    }
    flush(out)
}

/// Two-column `x,delta` table (header optional) as a tabulated heterogeneity.
pub fn read_tabulated<R: Read>(r: R) -> Result<Heterogeneity> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
    let (mut x, mut delta) = (vec![], vec![]);
    for rec in rd.records() {
        let rec = rec?;
        let (a, b) = (rec.get(0).unwrap_or(""), rec.get(1).unwrap_or(""));
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                x.push(a);
                delta.push(b);
            }
            _ if x.is_empty() => continue,
            _ => return Err(Error::Io(format!("bad tabulated row {rec:?}"))),
        }
    }
    let het = Heterogeneity::Tabulated { x, delta };
    het.validate()?;
    Ok(het)
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn frame(title: &str, xr: (f64, f64), yr: (f64, f64), xlabel: &str, ylabel: &str) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{cx}\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">{title}</text>\n",
            "<rect x=\"{p}\" y=\"{p}\" width=\"{iw}\" height=\"{ih}\" fill=\"none\" stroke=\"black\"/>\n",
            "<text x=\"{cx}\" y=\"{xb}\" text-anchor=\"middle\">{xl} [{x0:.4}, {x1:.4}]</text>\n",
            "<text x=\"12\" y=\"{cy}\" transform=\"rotate(-90 12 {cy})\" text-anchor=\"middle\">{yl} [{y0:.4}, {y1:.4}]</text>\n"
        ),
        w = W,
        h = H,
        cx = W / 2.0,
        cy = H / 2.0,
        p = PAD,
        iw = W - 2.0 * PAD,
        ih = H - 2.0 * PAD,
        xb = H - 15.0,
        title = title,
        xl = xlabel,
        yl = ylabel,
        x0 = xr.0,
        x1 = xr.1,
        y0 = yr.0,
        y1 = yr.1,
    )
}

/// Line plot of named series.
pub fn svg_lines(title: &str, xlabel: &str, ylabel: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let xr = bounds(series.iter().flat_map(|(_, s)| s.iter().map(|p| p.0)));
    let yr = bounds(series.iter().flat_map(|(_, s)| s.iter().map(|p| p.1)));
    let sx = |x: f64| PAD + (x - xr.0) / (xr.1 - xr.0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - yr.0) / (yr.1 - yr.0) * (H - 2.0 * PAD);
    let mut out = frame(title, xr, yr, xlabel, ylabel);
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        out += &format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\" points=\"{}\"/>\n",
            path.join(" ")
        );
        out += &format!(
            "<text x=\"{:.0}\" y=\"{:.0}\" fill=\"{color}\">{name}</text>\n",
            W - PAD + 4.0 - 60.0,
            PAD + 14.0 * (k as f64 + 1.0)
        );
    }
    out + "</svg>\n"
}

pub fn label_color(l: ScatterLabel) -> &'static str {
    match l {
        ScatterLabel::Pen => "#4c9be8",
        ScatterLabel::Reb => "#e8644c",
        ScatterLabel::Dec1 => "#5cb85c",
        ScatterLabel::Dec2 => "#9b59b6",
        ScatterLabel::Unresolved => "#bbbbbb",
    }
}

/// Heat map of scattering labels over the (d0, eps0) grid.
pub fn svg_phase(title: &str, cells: &[PhaseCell]) -> String {
    let mut d0s: Vec<f64> = cells.iter().map(|c| c.d0).collect();
    let mut eps: Vec<f64> = cells.iter().map(|c| c.eps0).collect();
    for v in [&mut d0s, &mut eps] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let xr = bounds(d0s.iter().copied());
    let yr = bounds(eps.iter().copied());
    let cw = (W - 2.0 * PAD) / d0s.len() as f64;
    let ch = (H - 2.0 * PAD) / eps.len() as f64;
    let mut out = frame(title, xr, yr, "d0", "eps0");
    for c in cells {
        let i = d0s.partition_point(|&d| d < c.d0);
        let j = eps.partition_point(|&e| e < c.eps0);
        out += &format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
            PAD + i as f64 * cw,
            H - PAD - (j as f64 + 1.0) * ch,
            cw,
            ch,
            label_color(c.outcome.label)
        );
    }
    for (k, l) in [ScatterLabel::Pen, ScatterLabel::Reb, ScatterLabel::Dec1, ScatterLabel::Dec2].iter().enumerate() {
        out +=
            &format!("<text x=\"{:.0}\" y=\"40\" fill=\"{}\">{}</text>\n", PAD + 60.0 * k as f64, label_color(*l), l);
    }
    out + "</svg>\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced_ode::{Event, EventKind};

    #[test]
    fn trajectory_round_trip() {
        let mut t = Trajectory::new();
        for i in 0..20 {
            let x = i as f64 * 0.1;
            t.push(x, InterfaceState::new(7.1 + x.sin(), -0.3 / 7.0 + x, 1.0 / 3.0, -1e-17 * x));
        }
        t.events.push(Event { t: 0.5, kind: EventKind::LeftEdge, position: -5.0 });
        let mut buf = vec![];
        write_trajectory(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,l1,l2,r1,r2,h\n"));
        let back = read_trajectory(buf.as_slice()).unwrap();
        assert_eq!(back.times, t.times);
        assert_eq!(back.states, t.states);
        let mut ev = vec![];
        write_events(&t, &mut ev).unwrap();
        assert_eq!(String::from_utf8(ev).unwrap(), "t,kind,position\n0.5,l1-edge,-5\n");
    }

    #[test]
    fn tabulated_reader() {
        let text = "x,delta\n-1, 0.001\n0,0.002\n1,0.001\n";
        let het = read_tabulated(text.as_bytes()).unwrap();
        assert_eq!(het.delta(0.5, 0.0), 0.0015);
        assert!(read_tabulated("0,1\n1,x\n".as_bytes()).is_err());
    }

    #[test]
    fn svg_is_well_formed() {
        let s = svg_lines("w", "t", "h", &[("h", vec![(0.0, 1.0), (1.0, 2.0)])]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("polyline"));
    }
}
