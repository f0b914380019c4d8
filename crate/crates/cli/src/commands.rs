use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use inerton_lattice::dispersion::{dispersion_sweep, CouplingMode, KGrid};
use inerton_lattice::dynamics::{
    integrate as integrate_modes, mode_coefficients, resonance_sweep, CloudEquation, DampingSpec,
    DriveSpec, IntegrationConfig, ModeCoefficients, ModeProblem, ModeSelection, ModeState,
    OmegaRange,
};
use inerton_lattice::kinematics::{earth_flows, CloudKinematics, FlowKind};
use inerton_lattice::lattice_model::{validate_model, ModelFile};
use inerton_lattice::report::{
    float, format_table, write_dispersion, write_resonance, write_table_csv, write_trajectory,
    Header, TableRow,
};
use inerton_lattice::resonator::{
    check_geometry, earth_path_lengths, harmonic_lengths, spectral_window, travel_times,
};
use inerton_lattice::{ChainParameters, Model, PhysicalConstants};
use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{CliError, CliResult};
use crate::{
    DispersionArgs, IntegrateArgs, KinematicsArgs, ModelArgs, ResonanceArgs, ResonatorArgs,
};

/// Samples the trajectory CSV aims for when no stride is given.
const DEFAULT_SAMPLES: usize = 1000;

struct Loaded {
    model: Model,
    source: String,
    file: ModelFile,
}

fn load_model(args: &ModelArgs, constants: &PhysicalConstants) -> CliResult<Loaded> {
    match &args.model {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
            let file = ModelFile::parse(&text)?;
            let model = file.to_model(constants)?;
            Ok(Loaded {
                model,
                source: path.display().to_string(),
                file,
            })
        }
        None => {
            let model = ChainParameters::default().build()?;
            let file = ModelFile::from_model(&model, constants);
            Ok(Loaded {
                model,
                source: "built-in reference chain".to_owned(),
                file,
            })
        }
    }
}

fn load_valid_model(args: &ModelArgs, constants: &PhysicalConstants) -> CliResult<Loaded> {
    let loaded = load_model(args, constants)?;
    let report = validate_model(&loaded.model);
    if !report.is_ok() {
        let failures: Vec<String> = report.failures().map(ToString::to_string).collect();
        return Err(CliError::Model(format!(
            "{} failed validation: {}",
            loaded.source,
            failures.join("; ")
        )));
    }
    Ok(loaded)
}

/// Command name, model source and every model entry as `section.key`.
fn model_header(command: &str, loaded: &Loaded) -> Header {
    let mut header = Header::new();
    header
        .push("command", command)
        .push("model", &loaded.source);
    for section in &loaded.file.sections {
        for (key, value) in &section.entries {
            header.push(format!("{}.{key}", section.name), value);
        }
    }
    header
}

fn write_output(
    out: &Option<PathBuf>,
    write: impl FnOnce(&mut Box<dyn Write>) -> io::Result<()>,
) -> CliResult<()> {
    let (mut sink, path): (Box<dyn Write>, &Path) = match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::file(path, e))?;
            (Box::new(BufWriter::new(file)), path)
        }
        None => (
            Box::new(BufWriter::new(io::stdout().lock())),
            Path::new("<stdout>"),
        ),
    };
    match write(&mut sink).and_then(|()| sink.flush()) {
        // a closed pipe (`| head`) is not worth reporting
        Err(e) if out.is_none() && e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        result => result.map_err(|e| CliError::file(path, e)),
    }
}

fn natural_index(grid: &KGrid, k_index: usize) -> CliResult<usize> {
    if k_index >= grid.len() {
        return Err(CliError::Usage(format!(
            "--k-index {k_index} out of range (grid has {} points)",
            grid.len()
        )));
    }
    Ok(k_index)
}

pub fn dispersion(args: DispersionArgs) -> CliResult<()> {
    let constants = PhysicalConstants::default();
    let loaded = load_valid_model(&args.model, &constants)?;
    let spec = &loaded.model.spec;
    let grid = match args.grid {
        Some(n) => KGrid::uniform(spec, n)?,
        None => KGrid::natural(spec),
    };
    let rows = dispersion_sweep(&loaded.model, &grid, &CouplingMode::default())?;

    let mut header = model_header("dispersion", &loaded);
    let points: Vec<String> = grid
        .points_per_axis()
        .iter()
        .map(ToString::to_string)
        .collect();
    header
        .push("grid", points.join(","))
        .push("coupling_mode", "isotropic_scalar");
    write_output(&args.out, |w| write_dispersion(w, &header, &rows))
}

pub fn integrate(args: IntegrateArgs) -> CliResult<()> {
    let constants = PhysicalConstants::default();
    let loaded = load_valid_model(&args.model, &constants)?;
    let grid = KGrid::natural(&loaded.model.spec);
    let selection = if args.matrix {
        ModeSelection::Matrix
    } else {
        ModeSelection::Branch(args.mode.branch)
    };
    let all = mode_coefficients(&loaded.model, &grid, selection)?;
    let indices: Vec<usize> = match args.mode.k_index {
        Some(i) => vec![natural_index(&grid, i)?],
        None => (0..grid.len()).collect(),
    };
    let dimension = all[0].dimension();
    if args.component >= dimension {
        return Err(CliError::Usage(format!(
            "--component {} out of range (modes have {dimension} components)",
            args.component
        )));
    }

    let drive = if args.force != 0.0 {
        let omega = args
            .omega
            .ok_or_else(|| CliError::Usage("--force needs --omega".to_owned()))?;
        Some(DriveSpec::new(
            DVector::from_element(dimension, args.force),
            omega,
        )?)
    } else {
        None
    };
    let damping = DampingSpec::new(args.eta)?;

    let selected: Vec<&ModeCoefficients> = indices.iter().map(|&i| &all[i]).collect();
    let fastest = selected
        .iter()
        .map(|c| c.max_frequency().max(c.coupling_rate()))
        .fold(drive.as_ref().map_or(0.0, |d| d.omega), f64::max);
    let dt = match args.dt {
        Some(dt) => dt,
        None if fastest > 0.0 => 0.02 / fastest,
        None => {
            return Err(CliError::Usage(
                "the selected modes do not move; pass --dt".to_owned(),
            ))
        }
    };
    let slowest = selected
        .iter()
        .map(|c| c.max_frequency())
        .filter(|w| *w > 0.0)
        .fold(f64::INFINITY, f64::min);
    let t_end = match args.t_end {
        Some(t) => t,
        None if slowest.is_finite() => 100.0 * 2.0 * PI / slowest,
        None => {
            return Err(CliError::Usage(
                "the selected modes do not move; pass --t-end".to_owned(),
            ))
        }
    };
    if !(dt.is_finite() && dt > 0.0 && t_end.is_finite() && t_end >= 0.0) {
        return Err(CliError::Usage(format!(
            "--dt must be positive and --t-end non-negative (got {dt}, {t_end})"
        )));
    }
    let steps = (t_end / dt).round() as usize;
    let stride = match args.stride {
        Some(s) => s,
        None => steps.div_ceil(DEFAULT_SAMPLES).max(1),
    };
    let cloud: CloudEquation = args.cloud.into();

    let problems: Vec<ModeProblem> = indices
        .iter()
        .map(|&i| ModeProblem {
            k_index: i,
            coefficients: all[i].clone(),
            drive: drive.clone(),
            initial: ModeState::with_zero_cloud_momentum(
                &all[i],
                0.0,
                DVector::from_element(dimension, Complex64::new(args.amplitude, 0.0)),
                DVector::from_element(dimension, Complex64::new(0.0, 0.0)),
            ),
        })
        .collect();
    let config = IntegrationConfig::new(t_end, dt)
        .with_stride(stride)
        .with_cloud(cloud);
    let record = integrate_modes(&problems, damping, &config)?;

    let mut header = model_header("integrate", &loaded);
    header
        .push(
            "k_index",
            args.mode
                .k_index
                .map_or("all".to_owned(), |i| i.to_string()),
        )
        .push(
            "modes",
            if args.matrix {
                "matrix".to_owned()
            } else {
                format!("branch {}", args.mode.branch)
            },
        )
        .push("component", args.component)
        .push_float("dt", dt)
        .push_float("t_end", t_end)
        .push("stride", stride)
        .push_float("eta", args.eta)
        .push_float("force", args.force)
        .push(
            "omega",
            drive.as_ref().map_or("none".to_owned(), |d| float(d.omega)),
        )
        .push_float("amplitude", args.amplitude)
        .push("initial", "A = amplitude, dA/dt = 0, a = 0, P = 0")
        .push(
            "cloud",
            match cloud {
                CloudEquation::Coupled => "coupled",
                CloudEquation::Prescribed => "prescribed",
            },
        )
        .push("scheme", "triple-jump");
    write_output(&args.out, |w| {
        write_trajectory(w, &header, &record, args.component)
    })
}

pub fn resonance(args: ResonanceArgs) -> CliResult<()> {
    let constants = PhysicalConstants::default();
    let loaded = load_valid_model(&args.model, &constants)?;
    let grid = KGrid::natural(&loaded.model.spec);
    let all = mode_coefficients(
        &loaded.model,
        &grid,
        ModeSelection::Branch(args.mode.branch),
    )?;
    let k_index = natural_index(&grid, args.mode.k_index.unwrap_or(grid.len() - 1))?;
    let coefficients = &all[k_index];
    let (v, tau) = coefficients
        .as_scalar()
        .expect("branch selection yields scalar modes");
    let omega_res = coefficients.max_frequency();
    let needs_default = args.omega_min.is_none() || args.omega_max.is_none() || args.eta.is_none();
    if needs_default && omega_res == 0.0 {
        return Err(CliError::Usage(format!(
            "mode {k_index} has zero frequency; pass --omega-min, --omega-max and --eta"
        )));
    }
    let omega_min = args.omega_min.unwrap_or(0.5 * omega_res);
    let omega_max = args.omega_max.unwrap_or(1.5 * omega_res);
    let eta = args.eta.unwrap_or(0.01 * omega_res);
    let range = OmegaRange::new(omega_min, omega_max, args.omega_steps)?;
    let curve = resonance_sweep(coefficients, args.force, &range, DampingSpec::new(eta)?)?;

    let mut header = model_header("resonance", &loaded);
    let label: Vec<String> = grid
        .label(k_index)
        .iter()
        .map(ToString::to_string)
        .collect();
    header
        .push("k_index", k_index)
        .push("k_label", label.join(","))
        .push("branch", args.mode.branch)
        .push_float("v_tilde", v)
        .push_float("tau_tilde", tau)
        .push_float("Omega", omega_res)
        .push_float("omega_min", omega_min)
        .push_float("omega_max", omega_max)
        .push("omega_steps", args.omega_steps)
        .push_float("eta", eta)
        .push_float("force", args.force);
    write_output(&args.out, |w| write_resonance(w, &header, &curve))
}

fn constants_header(header: &mut Header, c: &PhysicalConstants) {
    header
        .push_float("planck", c.planck)
        .push_float("boltzmann", c.boltzmann)
        .push_float("speed_of_light", c.speed_of_light)
        .push_float("proton_mass", c.proton_mass)
        .push_float("earth_radius", c.earth_radius);
}

pub fn kinematics(args: KinematicsArgs) -> CliResult<()> {
    let c = PhysicalConstants::default();
    let mass = args.mass_amu * c.proton_mass;
    let k = match args.velocity {
        Some(v) => CloudKinematics::from_velocity(mass, v, args.g0, &c)?,
        None => CloudKinematics::from_temperature(mass, args.temperature, args.g0, &c)?,
    };

    let mut rows = vec![TableRow::new("mass", "M", k.mass, "kg")];
    if let Some(t) = k.temperature {
        rows.push(TableRow::new("temperature", "T", t, "K"));
    }
    rows.extend([
        TableRow::new("velocity", "v0", k.velocity, "m/s"),
        TableRow::new("de Broglie wavelength", "lambda", k.wavelength, "m"),
        TableRow::new("cloud amplitude", "Lambda", k.amplitude, "m"),
        TableRow::new(
            "enveloping amplitude",
            "Lambda/pi",
            k.enveloping_amplitude(),
            "m",
        ),
        TableRow::new(
            "transverse extent",
            "2Lambda/pi",
            k.transverse_extent(),
            "m",
        ),
    ]);
    if let Some(overlap) = k.overlap {
        rows.push(TableRow::new("overlap ratio", "Lambda/g0", overlap, "1"));
    }
    if args.earth {
        for flow in earth_flows(&c) {
            let (name, n) = match flow.kind {
                FlowKind::Orbital => ("orbital flow", 1),
                FlowKind::Rotational => ("rotational flow", 2),
            };
            rows.extend([
                TableRow::new(
                    &format!("{name} velocity"),
                    &format!("v0{n}"),
                    flow.velocity,
                    "m/s",
                ),
                TableRow::new(
                    &format!("{name} wavelength"),
                    &format!("lambda{n}"),
                    flow.wavelength,
                    "m",
                ),
                TableRow::new(
                    &format!("{name} amplitude"),
                    &format!("Lambda{n}"),
                    flow.amplitude,
                    "m",
                ),
            ]);
        }
    }
    print!("{}", format_table(&rows));

    if let Some(out) = &args.out {
        let mut header = Header::new();
        header
            .push("command", "kinematics")
            .push_float("mass_amu", args.mass_amu);
        match args.velocity {
            Some(v) => header.push_float("velocity", v),
            None => header.push_float("temperature", args.temperature),
        };
        header
            .push("g0", args.g0.map_or("none".to_owned(), float))
            .push("earth", args.earth);
        constants_header(&mut header, &c);
        write_output(&Some(out.clone()), |w| write_table_csv(w, &header, &rows))?;
    }
    Ok(())
}

pub fn resonator(args: ResonatorArgs) -> CliResult<()> {
    let c = PhysicalConstants::default();
    let radius = args.radius.unwrap_or(c.earth_radius);
    let (lt, lr, ratio) = earth_path_lengths(radius)?;
    let (tt, tr) = travel_times(lt, lr, c.speed_of_light)?;
    let window = spectral_window(args.nu_debye, args.l_max, c.speed_of_light)?;

    let mut rows = vec![
        TableRow::new("tangential path", "L_tan", lt, "m"),
        TableRow::new("radial path", "L_rad", lr, "m"),
        TableRow::new("path ratio", "L_tan/L_rad", ratio, "1"),
        TableRow::new("tangential time", "t_tan", tt, "s"),
        TableRow::new("radial time", "t_rad", tr, "s"),
        TableRow::new("shortest wavelength", "lambda_min", window.lambda_min, "m"),
        TableRow::new("longest wavelength", "lambda_max", window.lambda_max, "m"),
        TableRow::new("lowest frequency", "nu_min", window.nu_min, "Hz"),
        TableRow::new("highest frequency", "nu_max", window.nu_max, "Hz"),
    ];

    let mut verdict = None;
    if let Some(dims) = &args.check {
        let check = check_geometry(dims[0], dims[1], args.tolerance)?;
        let g = check.geometry;
        rows.extend([
            TableRow::new("resonator ratio", "l_tan/l_rad", g.ratio, "1"),
            TableRow::new("ratio deviation", "delta", g.ratio_deviation, "1"),
        ]);
        if let Some(n_max) = args.harmonics {
            for (n, t, r) in harmonic_lengths(&g, n_max) {
                rows.push(TableRow::new(
                    &format!("harmonic {n} horizontal"),
                    &format!("l_tan/{n}"),
                    t,
                    "m",
                ));
                rows.push(TableRow::new(
                    &format!("harmonic {n} vertical"),
                    &format!("l_rad/{n}"),
                    r,
                    "m",
                ));
            }
        }
        verdict = Some(format!(
            "check: {} l_tan/l_rad = {:.5}, deviation {:.3}% from pi/2 (tolerance {}%)",
            if check.passed { "PASS" } else { "FAIL" },
            g.ratio,
            100.0 * g.ratio_deviation,
            100.0 * args.tolerance
        ));
    } else if args.harmonics.is_some() {
        return Err(CliError::Usage(
            "--harmonics needs --check LT LR".to_owned(),
        ));
    }

    print!("{}", format_table(&rows));
    if let Some(line) = &verdict {
        println!("{line}");
    }

    if let Some(out) = &args.out {
        let mut header = Header::new();
        header
            .push("command", "resonator")
            .push_float("radius", radius)
            .push_float("nu_debye", args.nu_debye)
            .push_float("l_max", args.l_max);
        match &args.check {
            Some(d) => header.push("check", format!("{},{}", float(d[0]), float(d[1]))),
            None => header.push("check", "none"),
        };
        header.push_float("tolerance", args.tolerance).push(
            "harmonics",
            args.harmonics.map_or("none".to_owned(), |n| n.to_string()),
        );
        constants_header(&mut header, &c);
        write_output(&Some(out.clone()), |w| write_table_csv(w, &header, &rows))?;
    }
    Ok(())
}

pub fn validate(args: ModelArgs) -> CliResult<()> {
    let constants = PhysicalConstants::default();
    let loaded = load_model(&args, &constants)?;
    let report = validate_model(&loaded.model);
    println!("model: {}", loaded.source);
    print!("{report}");
    if report.is_ok() {
        println!("valid");
        Ok(())
    } else {
        Err(CliError::Model(format!(
            "{} failed {} check(s)",
            loaded.source,
            report.failures().count()
        )))
    }
}
