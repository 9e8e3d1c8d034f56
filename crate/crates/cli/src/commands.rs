use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use docksim::analysis::{classify_restitution, observed_energy, resample, restitution, PortSample};
use docksim::dynamics::{simulate as run_simulation, ContactEvent, Mode, Run};
use docksim::linear::{linearize_2d, penetration_dde_coeffs, DdeCoefficients};
use docksim::stability::{
    analyze, critical_damping, stability_boundary, verdict_4th_order, BoundaryAxis, FourthOrderVerdict,
    StabilityResult, Verdict,
};
use nalgebra::{Matrix4, Vector3};
use serde::Serialize;
use serde_json::json;

use crate::scenario::{Scenario, ScenarioFile};
use crate::{num, CliError};

fn load(path: &Path, damping: Option<f64>, delay: Option<f64>) -> Result<Scenario, CliError> {
    let mut file = ScenarioFile::load(path)?;
    if let Some(b) = damping {
        file.contact.b_v = b;
    }
    if let Some(h) = delay {
        file.sim.h = h;
    }
    file.resolve()
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct EventReport {
    #[serde(flatten)]
    pub event: ContactEvent,
    pub epsilon: Option<f64>,
    pub class: Option<Verdict>,
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub scenario: PathBuf,
    pub mode: Mode,
    pub out: PathBuf,
    pub damping: Option<f64>,
    pub delay: Option<f64>,
}

/// Run a scenario and write `<out>.traj.csv`, `<out>.events.json` and the
/// `<out>.meta.json` sidecar.
pub fn simulate(args: &SimulateArgs) -> Result<Vec<EventReport>, CliError> {
    let scenario = load(&args.scenario, args.damping, args.delay)?;
    let p = &scenario.params;
    let start = Instant::now();
    let run = run_simulation(&p.sim, &p.body, &p.contact, args.mode)?;
    let elapsed = start.elapsed().as_secs_f64();

    let band = scenario.analysis.neutrality_band;
    let events: Vec<EventReport> = run
        .events()
        .iter()
        .map(|e| {
            let epsilon = restitution(e).ok();
            EventReport {
                event: *e,
                epsilon,
                class: epsilon.map(|x| classify_restitution(x, band)),
            }
        })
        .collect();
    let mode = match args.mode {
        Mode::Planar => "2d",
        Mode::Spatial => "3d",
    };
    let (steps, samples) = match &run {
        Run::Planar(o) => (o.steps, o.trajectory.samples.len()),
        Run::Spatial(o) => (o.steps, o.trajectory.samples.len()),
    };

    write(&with_suffix(&args.out, ".traj.csv"), &run.to_csv())?;
    let doc = json!({ "mode": mode, "events": events });
    write(&with_suffix(&args.out, ".events.json"), &(serde_json::to_string_pretty(&doc).unwrap() + "\n"))?;
    let meta = json!({
        "tool": "docksim",
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": args.scenario.display().to_string(),
        "mode": mode,
        "b_v": p.contact.virtual_damping,
        "h": p.sim.delay,
        "dt": p.sim.dt,
        "steps": steps,
        "samples": samples,
        "events": events.len(),
        "elapsed_s": elapsed,
    });
    write(&with_suffix(&args.out, ".meta.json"), &(serde_json::to_string_pretty(&meta).unwrap() + "\n"))?;
    Ok(events)
}

#[derive(Debug, Clone)]
pub enum StabilityInput {
    Direct { mu: f64, beta: f64, kappa: f64 },
    Scenario { path: PathBuf, beta: Option<f64> },
}

#[derive(Debug, Clone)]
pub struct StabilityArgs {
    pub input: StabilityInput,
    pub delay: Option<f64>,
    pub count: usize,
    pub band: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub mu: f64,
    pub beta: f64,
    pub kappa: f64,
    #[serde(flatten)]
    pub result: StabilityResult,
    /// Damping whose critical delay equals the queried delay.
    pub beta_c: Option<f64>,
    /// Present for scenario input.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub four_state: Option<FourthOrderVerdict>,
}

pub fn stability(args: &StabilityArgs) -> Result<StabilityReport, CliError> {
    let (coeffs, delay, band, four_state) = match &args.input {
        StabilityInput::Direct { mu, beta, kappa } => (
            DdeCoefficients::new(*mu, *beta, *kappa),
            args.delay,
            args.band.unwrap_or(docksim::stability::DEFAULT_NEUTRAL_BAND),
            None,
        ),
        StabilityInput::Scenario { path, beta } => {
            let s = load(path, *beta, args.delay)?;
            let p = &s.params;
            let band = args.band.unwrap_or(s.analysis.neutrality_band);
            let h = p.sim.delay;
            let v = verdict_4th_order(&p.body, &p.contact, h, band)?;
            (penetration_dde_coeffs(&p.body, &p.contact), Some(h), band, Some(v))
        }
    };
    let mut result = analyze(&coeffs, args.count, delay, band)?;
    if let Some(v) = &four_state {
        result.verdict = Some(v.verdict);
    }
    let beta_c = delay
        .filter(|h| *h > 0.0)
        .and_then(|h| critical_damping(coeffs.mass, coeffs.stiffness, h).ok());
    Ok(StabilityReport {
        mu: coeffs.mass,
        beta: coeffs.damping,
        kappa: coeffs.stiffness,
        result,
        beta_c,
        four_state,
    })
}

impl StabilityReport {
    pub fn to_text(&self) -> String {
        let r = &self.result;
        let mut out = format!(
            "mu = {} kg, beta = {} N s/m, kappa = {} N/m\nomega_c = {:.6} rad/s\nh_c = {:.6} ms\nsigma = {:.6}\n",
            self.mu,
            self.beta,
            self.kappa,
            r.omega_c,
            1e3 * r.h_c,
            r.sigma
        );
        let series: Vec<String> = r.h_n.iter().map(|h| format!("{:.6}", 1e3 * h)).collect();
        out += &format!("h_n = [{}] ms\n", series.join(", "));
        if let Some(v) = &self.four_state {
            out += &format!(
                "subsystem h_c: (m_a, b, k) {:.6} ms, (m, 2b, 2k) {:.6} ms\n",
                1e3 * v.contact_h_c,
                1e3 * v.translation_h_c
            );
        }
        if let Some(b) = self.beta_c {
            out += &format!("beta_c = {b:.6} N s/m\n");
        }
        if let Some(v) = r.verdict {
            out += &format!("verdict = {}\n", serde_json::to_value(v).unwrap().as_str().unwrap());
        }
        out
    }
}

/// `start:stop:count` (inclusive, evenly spaced) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Input(format!("bad grid '{spec}': expected start:stop:count or a comma list"));
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = if parts.len() == 3 {
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        match count {
            0 => return Err(bad()),
            1 => vec![start],
            n => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
        }
    } else if parts.len() == 1 {
        spec.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        return Err(bad());
    };
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    Ok(grid)
}

/// Boundary curve as CSV. Points that fail are written as `nan` rows and
/// reported in the second return value.
pub fn boundary(axis: BoundaryAxis, fixed: DdeCoefficients, grid: &[f64]) -> (String, Vec<String>) {
    let mut csv = String::from("x_value,h_critical,omega_c,sigma\n");
    let mut failures = Vec::new();
    for (x, point) in grid.iter().zip(stability_boundary(axis, fixed, grid)) {
        match point {
            Ok(p) => csv += &format!("{},{},{},{}\n", num(p.x), num(p.h_critical), num(p.omega_c), num(p.sigma)),
            Err(e) => {
                csv += &format!("{},nan,nan,nan\n", num(*x));
                failures.push(format!("x = {x}: {e}"));
            }
        }
    }
    (csv, failures)
}

fn rows(m: &Matrix4<f64>) -> Vec<[f64; 4]> {
    (0..4).map(|i| std::array::from_fn(|j| m[(i, j)] + 0.0)).collect()
}

/// Linearisation matrices of a scenario as JSON.
pub fn linearize(path: &Path, damping: Option<f64>) -> Result<String, CliError> {
    let s = load(path, damping, None)?;
    let lin = linearize_2d(&s.params.body, &s.params.contact)?;
    let n = lin.nominal;
    let doc = json!({
        "state_order": ["z", "v_z", "theta", "omega"],
        "F_x": rows(&lin.gradient),
        "T": rows(&lin.transform),
        "T_inv": rows(&lin.transform_inv),
        "F_y": rows(&lin.transformed),
        "m_a": lin.reduced_mass,
        "lever": lin.lever,
        "nominal": { "z": n.z, "v_z": n.v_z, "theta": n.theta, "omega": n.omega },
        "dde": lin.dde_coefficients(),
    });
    Ok(serde_json::to_string_pretty(&doc).unwrap() + "\n")
}

const PORT_COLUMNS: [&str; 12] = [
    "f_x", "f_y", "f_z", "tau_x", "tau_y", "tau_z", "v_x", "v_y", "v_z", "omega_x", "omega_y", "omega_z",
];

/// Columns of a port CSV. Missing port columns read as zero; other
/// columns, such as those of a 3D trajectory file, are ignored.
struct PortTable {
    times: Option<Vec<f64>>,
    columns: Vec<Vec<f64>>,
    len: usize,
}

fn read_ports(path: &Path) -> Result<PortTable, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let header = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        .clone();
    let index = |name: &str| header.iter().position(|h| h.trim() == name);
    let t_col = index("t");
    let cols: Vec<Option<usize>> = PORT_COLUMNS.iter().map(|c| index(c)).collect();
    if cols.iter().all(Option::is_none) {
        return Err(CliError::Input(format!(
            "{}: no port columns (expected some of {})",
            path.display(),
            PORT_COLUMNS.join(",")
        )));
    }
    let mut times = t_col.map(|_| Vec::new());
    let mut columns = vec![Vec::new(); PORT_COLUMNS.len()];
    let mut len = 0;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let field = |i: usize| -> Result<f64, CliError> {
            record
                .get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| CliError::Input(format!("{}: bad number on data row {}", path.display(), line + 1)))
        };
        if let (Some(t), Some(i)) = (times.as_mut(), t_col) {
            t.push(field(i)?);
        }
        for (col, idx) in columns.iter_mut().zip(&cols) {
            col.push(match idx {
                Some(i) => field(*i)?,
                None => 0.0,
            });
        }
        len += 1;
    }
    Ok(PortTable { times, columns, len })
}

impl PortTable {
    /// Bring the table onto the observer grid when its time column uses a
    /// different spacing.
    fn on_grid(self, dt: f64) -> Self {
        let Some(times) = &self.times else { return self };
        if times.len() < 2 {
            return self;
        }
        let spacing = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        if (spacing - dt).abs() <= 1e-9 * dt {
            return self;
        }
        let columns: Vec<Vec<f64>> = self.columns.iter().map(|c| resample(times, c, dt)).collect();
        let len = columns[0].len();
        Self {
            times: None,
            columns,
            len,
        }
    }

    fn samples(&self) -> Vec<PortSample> {
        let c = &self.columns;
        let v = |k: usize, i: usize| Vector3::new(c[k][i], c[k + 1][i], c[k + 2][i]);
        (0..self.len)
            .map(|i| PortSample {
                force: v(0, i),
                torque: v(3, i),
                velocity: v(6, i),
                angular_velocity: v(9, i),
            })
            .collect()
    }
}

/// Observed-energy CSV from measured and commanded port files.
pub fn energy(measured: &Path, commanded: &Path, dt: f64, tolerance: f64) -> Result<String, CliError> {
    let (m, c) = (read_ports(measured)?, read_ports(commanded)?);
    if m.len != c.len {
        return Err(CliError::Input(format!(
            "row count mismatch: {} has {} rows, {} has {}",
            measured.display(),
            m.len,
            commanded.display(),
            c.len
        )));
    }
    let (m, c) = (m.on_grid(dt), c.on_grid(dt));
    let records = observed_energy(&m.samples(), &c.samples(), dt, tolerance)?;
    let mut out = String::from("t,dE_x,dE_y,dE_z,dE_rx,dE_ry,dE_rz,dE_total,class\n");
    for r in records {
        out += &num(r.t);
        for ch in r.channels {
            out.push(',');
            out += &num(ch);
        }
        out += &format!(",{},{}\n", num(r.total), r.class.as_str());
    }
    Ok(out)
}
