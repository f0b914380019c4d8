//! CSV writers. Every file opens with `# key = value` lines echoing the
//! parameters that produced it; floats are written with 17 significant
//! digits so that reruns are byte-identical and values round-trip.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::dispersion::DispersionResult;
use crate::dynamics::{ResonanceCurve, TrajectoryRecord};

pub const DISPERSION_COLUMNS: &str = "k_index,k_value,branch,omega,gap_flag";
pub const TRAJECTORY_COLUMNS: &str = "t,k_index,ReA,ImA,ReAdot,ImAdot,Rea,Ima,Readot,Imadot,E,P";
pub const RESONANCE_COLUMNS: &str = "omega,amplitude";
pub const TABLE_COLUMNS: &str = "name,symbol,value,unit";

/// `{:.16e}`: 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Ordered `# key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Header {
    entries: Vec<(String, String)>,
}

impl Header {
    pub fn new() -> Header {
        Header::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Header {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn push_float(&mut self, key: impl Into<String>, value: f64) -> &mut Header {
        self.push(key, float(value))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn write_to(&self, out: &mut impl Write) -> io::Result<()> {
        for (key, value) in &self.entries {
            writeln!(out, "# {key} = {value}")?;
        }
        Ok(())
    }
}

/// Signed `k` for a chain, `|k|` otherwise.
fn k_value(row: &DispersionResult) -> f64 {
    match row.at.components() {
        [k] => *k,
        _ => row.at.norm(),
    }
}

pub fn write_dispersion(
    out: &mut impl Write,
    header: &Header,
    rows: &[DispersionResult],
) -> io::Result<()> {
    header.write_to(out)?;
    writeln!(out, "{DISPERSION_COLUMNS}")?;
    for row in rows {
        let k = float(k_value(row));
        for (branch, (omega, gap)) in row.omegas.iter().zip(row.gap_flags()).enumerate() {
            writeln!(
                out,
                "{},{k},{branch},{},{}",
                row.k_index,
                float(*omega),
                u8::from(gap)
            )?;
        }
    }
    Ok(())
}

/// One row per sample per mode, for polarization `component` of the state
/// vectors. `P` is the Euclidean norm of the complex cloud momentum.
pub fn write_trajectory(
    out: &mut impl Write,
    header: &Header,
    record: &TrajectoryRecord,
    component: usize,
) -> io::Result<()> {
    header.write_to(out)?;
    writeln!(out, "{TRAJECTORY_COLUMNS}")?;
    let mut line = String::new();
    for (sample, t) in record.times.iter().enumerate() {
        for track in &record.tracks {
            let s = &track.states[sample];
            line.clear();
            let _ = write!(line, "{},{}", float(*t), track.k_index);
            for z in [
                s.atom[component],
                s.atom_velocity[component],
                s.cloud[component],
                s.cloud_velocity[component],
            ] {
                let _ = write!(line, ",{},{}", float(z.re), float(z.im));
            }
            let _ = write!(
                line,
                ",{},{}",
                float(track.energy[sample]),
                float(track.cloud_momentum[sample].norm())
            );
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

pub fn write_resonance(
    out: &mut impl Write,
    header: &Header,
    curve: &ResonanceCurve,
) -> io::Result<()> {
    header.write_to(out)?;
    writeln!(out, "{RESONANCE_COLUMNS}")?;
    for (omega, amplitude) in &curve.points {
        writeln!(out, "{},{}", float(*omega), float(*amplitude))?;
    }
    Ok(())
}

/// A labelled quantity for the calculator tables.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub name: String,
    pub symbol: String,
    pub value: f64,
    pub unit: String,
}

impl TableRow {
    pub fn new(name: &str, symbol: &str, value: f64, unit: &str) -> TableRow {
        TableRow {
            name: name.to_owned(),
            symbol: symbol.to_owned(),
            value,
            unit: unit.to_owned(),
        }
    }
}

pub fn write_table_csv(out: &mut impl Write, header: &Header, rows: &[TableRow]) -> io::Result<()> {
    header.write_to(out)?;
    writeln!(out, "{TABLE_COLUMNS}")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.name, r.symbol, float(r.value), r.unit)?;
    }
    Ok(())
}

/// Aligned plain-text table, values to 6 significant digits.
pub fn format_table(rows: &[TableRow]) -> String {
    let width =
        |f: fn(&TableRow) -> &str| rows.iter().map(|r| f(r).chars().count()).max().unwrap_or(0);
    let name_w = width(|r| &r.name);
    let symbol_w = width(|r| &r.symbol);
    let mut text = String::new();
    for r in rows {
        let _ = writeln!(
            text,
            "{:<name_w$}  {:<symbol_w$}  {:>13.5e}  {}",
            r.name, r.symbol, r.value, r.unit
        );
    }
    text
}
