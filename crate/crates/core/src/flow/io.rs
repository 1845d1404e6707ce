//! CSV export and import of flows.
//!
//! The first line is `# ` followed by a JSON header; the remaining lines are
//! `j,y,u` with shortest round-trip float formatting. Node values are
//! recovered exactly by rescaling with `p^m`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{FlowParams, PiecewiseLinearFlow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowHeader {
    pub p: u32,
    pub q: u32,
    pub m: u32,
    pub alpha: f64,
    pub ell_m: f64,
    pub s_m: f64,
    pub n_nodes: usize,
}

impl FlowHeader {
    pub fn of(flow: &PiecewiseLinearFlow) -> Self {
        let fp = flow.params();
        Self {
            p: fp.p(),
            q: fp.q(),
            m: flow.level(),
            alpha: fp.alpha(),
            ell_m: flow.ell(),
            s_m: flow.slope_magnitude(),
            n_nodes: flow.n_nodes(),
        }
    }
}

pub fn write_csv<W: Write>(flow: &PiecewiseLinearFlow, mut out: W) -> Result<()> {
    let header = serde_json::to_string(&FlowHeader::of(flow))?;
    writeln!(out, "# {header}")?;
    writeln!(out, "j,y,u")?;
    for j in 0..flow.n_nodes() {
        writeln!(out, "{j},{:?},{:?}", flow.node_y(j), flow.node_value(j))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: BufRead>(input: R) -> Result<PiecewiseLinearFlow> {
    let mut lines = input.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Parse("empty flow file".into()))??;
    let json = first
        .strip_prefix("# ")
        .ok_or_else(|| Error::Parse("missing '# {json}' header line".into()))?;
    let header: FlowHeader = serde_json::from_str(json)?;
    let params = FlowParams::new(header.p, header.q)?;
    let columns = lines
        .next()
        .ok_or_else(|| Error::Parse("missing column line".into()))??;
    if columns.trim() != "j,y,u" {
        return Err(Error::Parse(format!("unexpected columns '{columns}'")));
    }
    let denom = params.p_pow(header.m) as f64;
    let mut scaled = Vec::with_capacity(header.n_nodes);
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let j: usize = parse_field(fields.next(), row, "j")?;
        let _y: f64 = parse_field(fields.next(), row, "y")?;
        let u: f64 = parse_field(fields.next(), row, "u")?;
        if j != scaled.len() {
            return Err(Error::Parse(format!("row {row}: expected node {}, got {j}", scaled.len())));
        }
        let s = (u * denom).round();
        if !(0.0..=denom).contains(&s) || s / denom != u {
            return Err(Error::Parse(format!(
                "row {row}: value {u} is not a multiple of p^-m"
            )));
        }
        scaled.push(s as u32);
    }
    PiecewiseLinearFlow::from_scaled(params, header.m, scaled)
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, row: usize, name: &str) -> Result<T> {
    let raw = field.ok_or_else(|| Error::Parse(format!("row {row}: missing column {name}")))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("row {row}: bad {name} value '{raw}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::build;

    #[test]
    fn round_trip_is_bit_exact() {
        for (p, q, m) in [(3, 3, 3), (5, 3, 2), (3, 5, 2)] {
            let flow = build(FlowParams::new(p, q).unwrap(), m).unwrap();
            let mut buf = Vec::new();
            write_csv(&flow, &mut buf).unwrap();
            let back = read_csv(buf.as_slice()).unwrap();
            assert_eq!(back, flow);
        }
    }

    #[test]
    fn header_carries_scales() {
        let flow = build(FlowParams::new(3, 3).unwrap(), 1).unwrap();
        let mut buf = Vec::new();
        write_csv(&flow, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        let header: FlowHeader = serde_json::from_str(&first[2..]).unwrap();
        assert_eq!((header.p, header.q, header.m, header.n_nodes), (3, 3, 1, 18));
        assert!((header.alpha - 0.5).abs() < 1e-15);
        assert_eq!(text.lines().nth(1), Some("j,y,u"));
    }

    #[test]
    fn corrupted_value_is_rejected() {
        let flow = build(FlowParams::new(3, 3).unwrap(), 1).unwrap();
        let mut buf = Vec::new();
        write_csv(&flow, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("\n2,", "\n2,X");
        assert!(read_csv(text.as_bytes()).is_err());
    }
}
