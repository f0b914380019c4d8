//! Plain-text `key = value` model files.
//!
//! ```text
//! [lattice]
//! dimension = 1
//! n_sites = 8
//! g0 = 4e-10
//! M_over_Mp = 30
//! m_over_M = 1e-3
//!
//! [force]
//! -1 = -10
//! 0 = 20
//! 1 = -10
//!
//! [coupling]
//! isotropic_scalar = true
//! -1 = 1e12
//! 1 = 1e12
//! ```
//!
//! Offset keys are comma-separated integer components; values are the
//! matrix entries in row-major order separated by whitespace. An isotropic
//! coupling entry may be a single scalar. Lines starting with `#` or `;`
//! are comments. [`ModelFile`] keeps the raw value strings, so writing a
//! parsed file reproduces its canonical form exactly.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::{
    scalar_part, CouplingConstants, ForceConstants, LatticeSpec, Model, Offset, PhysicalConstants,
};
use crate::error::{Error, Result};

const LATTICE: &str = "lattice";
const FORCE: &str = "force";
const COUPLING: &str = "coupling";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    /// Keys and raw values, in file order.
    pub entries: Vec<(String, String)>,
    line: usize,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Section {
        Section {
            name: name.into(),
            entries: Vec::new(),
            line: 0,
        }
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// A parsed model file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelFile {
    pub sections: Vec<Section>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<ModelFile> {
        let mut sections: Vec<Section> = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
                continue;
            }
            if let Some(header) = trimmed.strip_prefix('[') {
                let name = header
                    .strip_suffix(']')
                    .ok_or_else(|| config_error(line, "unterminated section header"))?
                    .trim();
                if name.is_empty() {
                    return Err(config_error(line, "empty section name"));
                }
                if sections.iter().any(|s| s.name == name) {
                    return Err(config_error(line, format!("duplicate section [{name}]")));
                }
                sections.push(Section {
                    name: name.to_string(),
                    entries: Vec::new(),
                    line,
                });
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| {
                config_error(line, format!("expected `key = value`, got `{trimmed}`"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(config_error(line, "empty key or value"));
            }
            let section = sections
                .last_mut()
                .ok_or_else(|| config_error(line, "entry before any section header"))?;
            if section.get(key).is_some() {
                return Err(config_error(line, format!("duplicate key `{key}`")));
            }
            section.push(key, value);
        }
        Ok(ModelFile { sections })
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// Interprets the file as a model. Masses are taken relative to
    /// `constants.proton_mass`.
    pub fn to_model(&self, constants: &PhysicalConstants) -> Result<Model> {
        for section in &self.sections {
            if ![LATTICE, FORCE, COUPLING].contains(&section.name.as_str()) {
                return Err(config_error(
                    section.line,
                    format!("unknown section [{}]", section.name),
                ));
            }
        }
        let lattice = self
            .section(LATTICE)
            .ok_or_else(|| config_error(0, "missing [lattice] section"))?;
        for (key, _) in &lattice.entries {
            if !["dimension", "n_sites", "g0", "M_over_Mp", "m_over_M"].contains(&key.as_str()) {
                return Err(config_error(
                    lattice.line,
                    format!("unknown key `{key}` in [lattice]"),
                ));
            }
        }
        let dimension: usize = required(lattice, "dimension")?;
        let n_sites = parse_list::<usize>(required_raw(lattice, "n_sites")?, ',')
            .ok_or_else(|| config_error(lattice.line, "n_sites must be a list of integers"))?;
        let g0: f64 = required(lattice, "g0")?;
        let mass_ratio: f64 = required(lattice, "M_over_Mp")?;
        let cloud_ratio: f64 = match lattice.get("m_over_M") {
            Some(raw) => parse_value(lattice, "m_over_M", raw)?,
            None => super::DEFAULT_CLOUD_MASS_RATIO,
        };
        let atom_mass = mass_ratio * constants.proton_mass;
        let spec = LatticeSpec::new(dimension, &n_sites, g0, atom_mass, cloud_ratio * atom_mass)?;

        let mut force = ForceConstants::new(dimension);
        if let Some(section) = self.section(FORCE) {
            for (key, raw) in &section.entries {
                let offset = parse_offset(section, key, dimension)?;
                let matrix = parse_matrix(section, key, raw, dimension, false)?;
                force.insert(offset, matrix)?;
            }
        }

        let coupling = match self.section(COUPLING) {
            None => CouplingConstants::new(dimension, true),
            Some(section) => {
                let isotropic = match section.get("isotropic_scalar") {
                    Some(raw) => parse_value::<bool>(section, "isotropic_scalar", raw)?,
                    None => true,
                };
                let mut coupling = CouplingConstants::new(dimension, isotropic);
                for (key, raw) in &section.entries {
                    if key == "isotropic_scalar" {
                        continue;
                    }
                    let offset = parse_offset(section, key, dimension)?;
                    let matrix = parse_matrix(section, key, raw, dimension, isotropic)?;
                    coupling.insert(offset, matrix)?;
                }
                coupling
            }
        };

        Model::new(spec, force, coupling)
    }

    /// Describes `model` in file form, using shortest round-trip decimal
    /// strings.
    pub fn from_model(model: &Model, constants: &PhysicalConstants) -> ModelFile {
        let spec = &model.spec;
        let mut lattice = Section::new(LATTICE);
        lattice.push("dimension", spec.dimension().to_string());
        lattice.push(
            "n_sites",
            spec.n_sites()
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        lattice.push("g0", format_float(spec.lattice_constant()));
        lattice.push(
            "M_over_Mp",
            format_float(spec.atom_mass() / constants.proton_mass),
        );
        lattice.push(
            "m_over_M",
            format_float(spec.cloud_mass() / spec.atom_mass()),
        );

        let d = spec.dimension();
        let mut force = Section::new(FORCE);
        for (offset, matrix) in model.force.iter() {
            force.push(format_offset(offset, d), format_matrix(matrix, false));
        }

        let mut coupling = Section::new(COUPLING);
        let isotropic = model.coupling.is_isotropic_scalar();
        coupling.push("isotropic_scalar", isotropic.to_string());
        for (offset, matrix) in model.coupling.iter() {
            coupling.push(format_offset(offset, d), format_matrix(matrix, isotropic));
        }

        ModelFile {
            sections: vec![lattice, force, coupling],
        }
    }
}

impl FromStr for ModelFile {
    type Err = Error;
    fn from_str(s: &str) -> Result<ModelFile> {
        ModelFile::parse(s)
    }
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, section) in self.sections.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "[{}]", section.name)?;
            for (key, value) in &section.entries {
                writeln!(f, "{key} = {value}")?;
            }
        }
        Ok(())
    }
}

fn config_error(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn required_raw<'a>(section: &'a Section, key: &str) -> Result<&'a str> {
    section.get(key).ok_or_else(|| {
        config_error(
            section.line,
            format!("missing key `{key}` in [{}]", section.name),
        )
    })
}

fn required<T: FromStr>(section: &Section, key: &str) -> Result<T> {
    parse_value(section, key, required_raw(section, key)?)
}

fn parse_value<T: FromStr>(section: &Section, key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| config_error(section.line, format!("cannot parse `{key}` value `{raw}`")))
}

fn parse_list<T: FromStr>(raw: &str, sep: char) -> Option<Vec<T>> {
    raw.split(sep).map(|s| s.trim().parse().ok()).collect()
}

fn parse_offset(section: &Section, key: &str, dimension: usize) -> Result<Offset> {
    let components = parse_list::<i32>(key, ',')
        .ok_or_else(|| config_error(section.line, format!("`{key}` is not an offset")))?;
    if components.len() != dimension {
        return Err(config_error(
            section.line,
            format!(
                "offset `{key}` has {} components, dimension is {dimension}",
                components.len()
            ),
        ));
    }
    Offset::new(&components)
}

fn parse_matrix(
    section: &Section,
    key: &str,
    raw: &str,
    dimension: usize,
    allow_scalar: bool,
) -> Result<DMatrix<f64>> {
    let values: Vec<f64> = raw
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| config_error(section.line, format!("bad matrix entries for `{key}`")))?;
    match values.len() {
        1 if allow_scalar || dimension == 1 => {
            Ok(DMatrix::identity(dimension, dimension) * values[0])
        }
        n if n == dimension * dimension => {
            Ok(DMatrix::from_row_slice(dimension, dimension, &values))
        }
        n => Err(config_error(
            section.line,
            format!("`{key}` needs {} entries, got {n}", dimension * dimension),
        )),
    }
}

fn format_offset(offset: &Offset, dimension: usize) -> String {
    offset
        .components(dimension)
        .iter()
        .map(i32::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn format_matrix(matrix: &DMatrix<f64>, isotropic: bool) -> String {
    if let (true, Some(s)) = (isotropic || matrix.nrows() == 1, scalar_part(matrix)) {
        return format_float(s);
    }
    let d = matrix.nrows();
    (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| format_float(matrix[(i, j)]))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Shortest decimal string that parses back to exactly `x`.
pub(crate) fn format_float(x: f64) -> String {
    let plain = format!("{x}");
    let sci = format!("{x:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_model::{build_chain_1d, validate_model, ChainParameters, PROTON_MASS};
    use proptest::prelude::*;

    const CHAIN: &str = "\
[lattice]
dimension = 1
n_sites = 8
g0 = 4e-10
M_over_Mp = 30
m_over_M = 1e-3

[force]
-1 = -10
0 = 20
1 = -10

[coupling]
isotropic_scalar = true
-1 = 1e12
0 = 0
1 = 1e12
";

    #[test]
    fn parses_chain() {
        let file = ModelFile::parse(CHAIN).unwrap();
        let model = file.to_model(&PhysicalConstants::default()).unwrap();
        assert_eq!(model.spec.n_sites(), &[8]);
        assert_eq!(model.spec.atom_mass(), 30.0 * PROTON_MASS);
        assert_eq!(model.force.len(), 3);
        assert_eq!(
            model.coupling.get(&Offset::along_x(1)).unwrap()[(0, 0)],
            1e12
        );
        assert!(validate_model(&model).is_ok());
    }

    #[test]
    fn canonical_text_round_trips_exactly() {
        let file = ModelFile::parse(CHAIN).unwrap();
        assert_eq!(file.to_string(), CHAIN);
    }

    #[test]
    fn writer_matches_builder() {
        let model = ChainParameters::default().build().unwrap();
        let constants = PhysicalConstants::default();
        let text = ModelFile::from_model(&model, &constants).to_string();
        assert_eq!(text, CHAIN);
        let back = ModelFile::parse(&text)
            .unwrap()
            .to_model(&constants)
            .unwrap();
        assert_eq!(back.force, model.force);
        assert_eq!(back.coupling, model.coupling);
    }

    #[test]
    fn parses_three_dimensional_matrices() {
        let text = "\
[lattice]
dimension = 3
n_sites = 4,4,6
g0 = 3e-10
M_over_Mp = 12

[force]
0,0,0 = 2 0 0 0 2 0 0 0 2
1,0,0 = -1 0 0 0 -1 0 0 0 -1
-1,0,0 = -1 0 0 0 -1 0 0 0 -1

[coupling]
isotropic_scalar = false
1,0,0 = 1 0 0 0 2 0 0 0 3
";
        let model = ModelFile::parse(text)
            .unwrap()
            .to_model(&PhysicalConstants::default())
            .unwrap();
        assert_eq!(model.spec.n_sites(), &[4, 4, 6]);
        assert_eq!(model.spec.cloud_mass(), 1e-3 * model.spec.atom_mass());
        let tau = model.coupling.get(&Offset::along_x(1)).unwrap();
        assert_eq!(tau[(2, 2)], 3.0);
        assert!(!model.coupling.is_isotropic_scalar());
    }

    #[test]
    fn malformed_files_report_line() {
        let cases = [
            ("[lattice\n", 1),
            ("dimension = 1\n", 1),
            ("[lattice]\ndimension\n", 2),
            ("[lattice]\ndimension = 1\ndimension = 2\n", 3),
        ];
        for (text, expected) in cases {
            match ModelFile::parse(text) {
                Err(Error::Config { line, .. }) => assert_eq!(line, expected, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn rejects_bad_content() {
        let constants = PhysicalConstants::default();
        let bad = [
            CHAIN.replace("[force]", "[forces]"),
            CHAIN.replace("g0 = 4e-10", "g0 = four"),
            CHAIN.replace("0 = 20", "0 = 20 1"),
            CHAIN.replace("-1 = -10", "-1,0 = -10"),
            CHAIN.replace("n_sites = 8", "n_sites = 1"),
            CHAIN.replace("dimension = 1\n", ""),
        ];
        for text in bad {
            let result = ModelFile::parse(&text).and_then(|f| f.to_model(&constants));
            assert!(result.is_err(), "accepted:\n{text}");
        }
    }

    proptest! {
        #[test]
        fn float_formatting_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }

        #[test]
        fn written_models_read_back(
            n in 2usize..64,
            g0 in 1e-11f64..1e-8,
            ratio in 1.0f64..300.0,
            stiffness in 1e-3f64..1e3,
            tau in 0.0f64..1e14,
        ) {
            let constants = PhysicalConstants::default();
            let mass = ratio * constants.proton_mass;
            let model = build_chain_1d(n, g0, mass, 1e-3 * mass, stiffness, tau).unwrap();
            let text = ModelFile::from_model(&model, &constants).to_string();
            let file = ModelFile::parse(&text).unwrap();
            prop_assert_eq!(file.to_string(), text);
            let back = file.to_model(&constants).unwrap();
            prop_assert_eq!(&back.force, &model.force);
            prop_assert_eq!(&back.coupling, &model.coupling);
            prop_assert_eq!(back.spec.lattice_constant(), g0);
            let rel = (back.spec.atom_mass() - mass).abs() / mass;
            prop_assert!(rel <= 4.0 * f64::EPSILON);
        }
    }
}
