//! `ris-vlc` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or input-format error, 3 domain or
//! infeasibility error, 4 I/O error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::datasets::{self, quantity, ReportDocument};
use crate::error::{Error, ErrorKind};
use crate::link_budget::{
    simulate_link, AirChannel, LinkMode, LinkParts, LinkScenario, Photodetector,
};
use crate::quantities::{ratio_to_db, FieldVPerUm, LengthM, PowerMw, Volts};
use crate::ris_device::{klein_cook, RisDevice, BRAGG_THRESHOLD};
use crate::tuning::{self, Mismatch, Tolerances};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Environment variable that disables ANSI styling.
pub const NO_COLOR_ENV: &str = "RIS_VLC_NO_COLOR";

const DEFAULT_DEVICE: &str = "3t2mb-8-tnf";

#[derive(Debug, Parser)]
#[command(
    name = "ris-vlc",
    version,
    about = "LC-RIS VLC link simulation and tuning",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(flatten)]
    pub config: CliConfig,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CliConfig {
    /// Air attenuation in dB/m
    #[arg(long, global = true, default_value_t = 0.0043, value_name = "DB_PER_M")]
    pub zeta_air: f64,

    /// Photodetector sensitivity (minimum detectable power), mW
    #[arg(long, global = true, default_value_t = 6.0, value_name = "MW")]
    pub pd_sens: f64,

    /// Photodetector saturation power, mW
    #[arg(long, global = true, default_value_t = 10.0, value_name = "MW")]
    pub pd_sat: f64,

    /// Embedded device id or path to a field-curve CSV
    #[arg(long, global = true, default_value = DEFAULT_DEVICE, value_name = "ID|CSV")]
    pub device: String,

    /// Also write the report (CSV for `sweep` without --json) to this file
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Print the JSON report instead of the human-readable summary
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Enhanced,
    Relay,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one link configuration
    Simulate {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Applied field, V/um
        #[arg(long)]
        e0: f64,
        /// Transmit power, mW
        #[arg(long)]
        tx_power: f64,
        /// Transmitter to RIS distance, m
        #[arg(long, default_value_t = 0.0)]
        d_tx_ris: f64,
        /// RIS to photodetector distance, m (relay mode only)
        #[arg(long, default_value_t = 0.0)]
        d_ris_pd: f64,
        /// Cell voltage, V (defaults to E0 times the cell thickness)
        #[arg(long)]
        v_applied: Option<f64>,
    },
    /// Tabulate emerged power, gain and range over a field grid
    Sweep {
        #[arg(long)]
        e0_from: f64,
        #[arg(long)]
        e0_to: f64,
        #[arg(long)]
        e0_step: f64,
        /// Power incident on the RIS, mW
        #[arg(long, default_value_t = 6.0)]
        tx_power: f64,
    },
    /// Fit the air attenuation coefficient to tabulated ranges
    FitAir {
        /// Rows CSV (mixture,e0_v_per_um,pe_mw,gain_db,range_m); embedded table by default
        #[arg(long)]
        rows: Option<PathBuf>,
    },
    /// Find the smallest field reaching a target range extension
    Tune {
        /// Target range, m
        #[arg(long)]
        target_range: f64,
    },
    /// Field of peak transmittance
    Peak,
    /// Audit a table's gain and range columns against its emerged power
    ValidateTable {
        #[arg(long)]
        rows: Option<PathBuf>,
        /// Gain tolerance, dB
        #[arg(long, default_value_t = 1e-4)]
        gain_tol: f64,
        /// Relative range tolerance
        #[arg(long, default_value_t = 0.03)]
        range_tol: f64,
        /// Absolute range tolerance floor, m
        #[arg(long, default_value_t = 0.02)]
        range_abs_tol: f64,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lib(e) => match e.kind() {
                ErrorKind::Domain => EXIT_DOMAIN,
                ErrorKind::Data => EXIT_USAGE,
                ErrorKind::Io => EXIT_IO,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn flag<T>(name: &str, r: crate::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Usage(format!("--{name}: {e}")))
}

/// What a command produces before it is rendered.
struct Outcome {
    report: ReportDocument,
    human: String,
    /// Sweep plot data.
    csv: Option<String>,
}

struct Style {
    color: bool,
}

impl Style {
    fn heading(&self, s: &str) -> String {
        if self.color {
            format!("\x1b[1m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            let rendered = e.render().to_string();
            return match e.kind() {
                K::DisplayHelp
                | K::DisplayVersion
                | K::DisplayHelpOnMissingArgumentOrSubcommand
                    if e.exit_code() == 0 =>
                {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };
    let style = Style { color };
    match execute(&cli, &style).and_then(|o| emit(&cli.config, o, out)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn emit(cfg: &CliConfig, o: Outcome, out: &mut dyn Write) -> CliResult<()> {
    let json = o.report.to_json()?;
    let stdout_text = if cfg.json {
        json.clone()
    } else if let Some(csv) = &o.csv {
        csv.clone()
    } else {
        o.human
    };
    if let Some(path) = &cfg.output {
        let body = match (&o.csv, cfg.json) {
            (Some(csv), false) => csv.as_bytes(),
            _ => json.as_bytes(),
        };
        datasets::write_atomic(path, body)?;
    }
    out.write_all(stdout_text.as_bytes()).map_err(|source| {
        CliError::Lib(Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
    })
}

struct Context {
    channel: AirChannel,
    detector: Photodetector,
}

fn context(cfg: &CliConfig) -> CliResult<Context> {
    let channel = flag("zeta-air", AirChannel::db_per_m(cfg.zeta_air))?;
    let sens = flag("pd-sens", PowerMw::new(cfg.pd_sens))?;
    let sat = flag("pd-sat", PowerMw::new(cfg.pd_sat))?;
    let detector = flag("pd-sat", Photodetector::new(sens, sat))?;
    Ok(Context { channel, detector })
}

fn load_device(cfg: &CliConfig) -> CliResult<RisDevice> {
    datasets::resolve_device(&cfg.device).map_err(|e| match e {
        Error::UnknownDevice(_) => CliError::Usage(format!("--device: {e}")),
        other => CliError::Lib(other),
    })
}

fn execute(cli: &Cli, style: &Style) -> CliResult<Outcome> {
    let cfg = &cli.config;
    let ctx = context(cfg)?;
    match &cli.command {
        Command::Simulate {
            mode,
            e0,
            tx_power,
            d_tx_ris,
            d_ris_pd,
            v_applied,
        } => {
            let device = load_device(cfg)?;
            let e0 = flag("e0", FieldVPerUm::new(*e0))?;
            let tx = flag("tx-power", PowerMw::new(*tx_power))?;
            let d1 = flag("d-tx-ris", LengthM::new(*d_tx_ris))?;
            let d2 = flag("d-ris-pd", LengthM::new(*d_ris_pd))?;
            let v = match v_applied {
                Some(v) => flag("v-applied", Volts::new(*v))?,
                None => device.voltage_for_field(e0),
            };
            let mode = match mode {
                ModeArg::Enhanced => LinkMode::EnhancedDetection,
                ModeArg::Relay => LinkMode::RelayAmplification,
            };
            let parts = LinkParts {
                channel: ctx.channel,
                detector: ctx.detector,
                device,
                e0,
                v_applied: v,
                tx_power: tx,
            };
            let scenario = flag("d-ris-pd", LinkScenario::new(parts, mode, d1, d2))?;
            simulate(&scenario, style)
        }
        Command::Sweep {
            e0_from,
            e0_to,
            e0_step,
            tx_power,
        } => {
            let device = load_device(cfg)?;
            let grid = field_grid(*e0_from, *e0_to, *e0_step)?;
            let tx = flag("tx-power", PowerMw::new(*tx_power))?;
            if tx.value() == 0.0 {
                return Err(CliError::Usage(
                    "--tx-power: sweep needs a positive power".into(),
                ));
            }
            sweep(&ctx, device, &grid, tx)
        }
        Command::FitAir { rows } => {
            let rows = match rows {
                Some(p) => datasets::load_table_rows_csv(p)?,
                None => datasets::embedded_table1(),
            };
            fit_air(&rows, style)
        }
        Command::Tune { target_range } => {
            let device = load_device(cfg)?;
            let target = flag("target-range", LengthM::new(*target_range))?;
            tune(&ctx, &device, target, style)
        }
        Command::Peak => {
            let device = load_device(cfg)?;
            peak(&ctx, &device, style)
        }
        Command::ValidateTable {
            rows,
            gain_tol,
            range_tol,
            range_abs_tol,
        } => {
            for (name, v) in [
                ("gain-tol", gain_tol),
                ("range-tol", range_tol),
                ("range-abs-tol", range_abs_tol),
            ] {
                if !(v.is_finite() && *v >= 0.0) {
                    return Err(CliError::Usage(format!(
                        "--{name}: {v} must be finite and non-negative"
                    )));
                }
            }
            let rows = match rows {
                Some(p) => datasets::load_table_rows_csv(p)?,
                None => datasets::embedded_table1(),
            };
            let tol = Tolerances {
                gain_db: *gain_tol,
                range_rel: *range_tol,
                range_abs: *range_abs_tol,
            };
            validate(&ctx, &rows, tol, style)
        }
    }
}

fn q(value: f64, unit: &'static str) -> CliResult<Value> {
    Ok(quantity(value, unit)?)
}

fn common_inputs(doc: &mut ReportDocument, ctx: &Context) -> CliResult<()> {
    doc.input("zeta_air", q(ctx.channel.zeta_db_per_m(), "dB/m")?);
    doc.input(
        "pd_sensitivity",
        q(ctx.detector.sensitivity().value(), "mW")?,
    );
    doc.input("pd_saturation", q(ctx.detector.saturation().value(), "mW")?);
    Ok(())
}

fn device_json(d: &RisDevice) -> CliResult<Value> {
    let kc = klein_cook(
        d.mixture.wavelength,
        d.thickness,
        d.refractive_index,
        d.grating_period,
        BRAGG_THRESHOLD,
    )?;
    let mut v = json!({
        "id": d.id,
        "curve_provenance": d.curve.provenance(),
        "host": d.mixture.host,
        "host_concentration": q(d.mixture.host_wt_pct.value(), "wt%")?,
        "sensitizer": d.mixture.sensitizer,
        "sensitizer_concentration": q(d.mixture.sensitizer_wt_pct.value(), "wt%")?,
        "temperature": q(d.mixture.temperature.value(), "degC")?,
        "wavelength": q(d.mixture.wavelength.value(), "nm")?,
        "thickness": q(d.thickness.value(), "um")?,
        "switching_voltage": q(d.switching_voltage.value(), "V")?,
        "relaxed_transmittance": q(d.relaxed_transmittance.value(), "ratio")?,
        "refractive_index": q(d.refractive_index, "1")?,
        "birefringence": q(d.birefringence, "1")?,
        "grating_period": q(d.grating_period.value(), "um")?,
        "klein_cook_q": q(kc.q, "1")?,
        "diffraction_regime": format!("{:?}", kc.regime),
        "notes": d.mixture.notes,
    });
    if let Some(r) = d.electro_optic_pm_per_v {
        v["electro_optic_coefficient"] = q(r, "pm/V")?;
    }
    Ok(v)
}

fn simulate(s: &LinkScenario, style: &Style) -> CliResult<Outcome> {
    let o = simulate_link(s)?;
    let state = s.device.state(s.v_applied);
    let mode = match s.mode() {
        LinkMode::EnhancedDetection => "enhanced",
        LinkMode::RelayAmplification => "relay",
    };

    let mut doc = ReportDocument::new("simulate");
    common_inputs(
        &mut doc,
        &Context {
            channel: s.channel,
            detector: s.detector,
        },
    )?;
    doc.input("mode", json!(mode))
        .input("device", device_json(&s.device)?)
        .input("e0", q(s.e0.value(), "V/um")?)
        .input("v_applied", q(s.v_applied.value(), "V")?)
        .input("tx_power", q(s.tx_power.value(), "mW")?)
        .input("d_tx_ris", q(s.d_tx_ris().value(), "m")?)
        .input("d_ris_pd", q(s.d_ris_pd().value(), "m")?);
    doc.result("device_state", json!(format!("{state:?}")))
        .result("ris_input_power", q(o.ris_input.value(), "mW")?)
        .result("ris_output_power", q(o.ris_output.value(), "mW")?)
        .result(
            "ris_transmittance",
            q(o.ris_transmittance.value(), "ratio")?,
        )
        .result(
            "ris_gain",
            q(ratio_to_db(o.ris_transmittance).value(), "dB")?,
        )
        .result("dc_gain", q(o.dc_gain.value(), "ratio")?)
        .result("pd_power", q(o.pd_power.value(), "mW")?)
        .result("pd_state", json!(format!("{:?}", o.pd_state)));
    if let Some(m) = o.range_margin_m {
        doc.result("range_margin", q(m, "m")?);
    }

    let mut h = String::new();
    let _ = writeln!(
        h,
        "{}",
        style.heading(&format!("simulate: {mode} mode, device {}", s.device.id))
    );
    let _ = writeln!(
        h,
        "  E0                {:>12.4} V/um ({:?})",
        s.e0.value(),
        state
    );
    let _ = writeln!(h, "  RIS input power   {:>12.4} mW", o.ris_input.value());
    let _ = writeln!(h, "  RIS output power  {:>12.4} mW", o.ris_output.value());
    let _ = writeln!(
        h,
        "  RIS gain          {:>12.6} dB",
        ratio_to_db(o.ris_transmittance).value()
    );
    let _ = writeln!(h, "  DC gain           {:>12.6}", o.dc_gain.value());
    let _ = writeln!(
        h,
        "  PD power          {:>12.4} mW [{:?}]",
        o.pd_power.value(),
        o.pd_state
    );
    if let Some(m) = o.range_margin_m {
        let _ = writeln!(h, "  range margin      {:>12.4} m", m);
    }
    Ok(Outcome {
        report: doc,
        human: h,
        csv: None,
    })
}

/// Inclusive grid from `from` to `to`; values rounded to 1e-12 so printed
/// fields parse back to the exact same value.
fn field_grid(from: f64, to: f64, step: f64) -> CliResult<Vec<FieldVPerUm>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(CliError::Usage(format!(
            "--e0-step: {step} must be positive"
        )));
    }
    let from_f = flag("e0-from", FieldVPerUm::new(from))?;
    let to_f = flag("e0-to", FieldVPerUm::new(to))?;
    if to_f < from_f {
        return Err(CliError::Usage(format!(
            "--e0-to: {to} is below --e0-from {from}"
        )));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    if n > 1_000_000 {
        return Err(CliError::Usage(format!(
            "--e0-step: {n} points is too many"
        )));
    }
    (0..n)
        .map(|i| {
            let e = ((from + i as f64 * step) * 1e12).round() / 1e12;
            flag("e0-from", FieldVPerUm::new(e))
        })
        .collect()
}

fn sweep(
    ctx: &Context,
    device: RisDevice,
    grid: &[FieldVPerUm],
    tx: PowerMw,
) -> CliResult<Outcome> {
    let mut csv = String::from("e0_v_per_um,pe_mw,gain_db,range_m\n");
    let mut rows = Vec::with_capacity(grid.len());
    let mut doc = ReportDocument::new("sweep");
    common_inputs(&mut doc, ctx)?;
    doc.input("device", device_json(&device)?)
        .input("tx_power", q(tx.value(), "mW")?)
        .input("e0_from", q(grid[0].value(), "V/um")?)
        .input("e0_to", q(grid[grid.len() - 1].value(), "V/um")?);

    let zero = LengthM::new(0.0).expect("zero length");
    let mut scenario = LinkScenario::enhanced(
        LinkParts {
            channel: ctx.channel,
            detector: ctx.detector,
            v_applied: device.voltage_for_field(grid[0]),
            device,
            e0: grid[0],
            tx_power: tx,
        },
        zero,
    );
    for &e0 in grid {
        scenario.e0 = e0;
        scenario.v_applied = scenario.device.voltage_for_field(e0);
        let o = simulate_link(&scenario)?;
        let gain = ratio_to_db(o.ris_transmittance).value();
        let range = o
            .range_margin_m
            .expect("positive tx power gives positive RIS output");
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            e0.value(),
            o.pd_power.value(),
            gain,
            range
        );
        rows.push(json!({
            "e0": q(e0.value(), "V/um")?,
            "pe": q(o.pd_power.value(), "mW")?,
            "gain": q(gain, "dB")?,
            "range_extension": q(range, "m")?,
        }));
    }
    doc.result("rows", Value::Array(rows));
    Ok(Outcome {
        report: doc,
        human: String::new(),
        csv: Some(csv),
    })
}

fn fit_air(rows: &[tuning::Table1Row], style: &Style) -> CliResult<Outcome> {
    let zeta = tuning::fit_air_attenuation(rows)?;
    let estimates = tuning::per_row_attenuation(rows);
    let (lo, hi) = estimates
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &z| {
            (a.min(z), b.max(z))
        });
    let mut doc = ReportDocument::new("fit-air");
    doc.input("rows", q(rows.len() as f64, "count")?);
    doc.result("zeta_air_db_per_m", q(zeta.in_db_per_m(), "dB/m")?)
        .result(
            "zeta_air_db_per_100m",
            q(zeta.in_db_per_m() * 100.0, "dB/100m")?,
        )
        .result("zeta_air_natural", q(zeta.natural(), "1/m")?)
        .result("rows_used", q(estimates.len() as f64, "count")?)
        .result("per_row_min", q(lo, "dB/m")?)
        .result("per_row_max", q(hi, "dB/m")?);

    let mut h = String::new();
    let _ = writeln!(
        h,
        "{}",
        style.heading("fit-air: median of per-row estimates")
    );
    let _ = writeln!(
        h,
        "  zeta_air   {:.6} dB/m  ({:.4} dB per 100 m)",
        zeta.in_db_per_m(),
        zeta.in_db_per_m() * 100.0
    );
    let _ = writeln!(h, "  rows used  {} of {}", estimates.len(), rows.len());
    let _ = writeln!(h, "  spread     [{lo:.6}, {hi:.6}] dB/m");
    Ok(Outcome {
        report: doc,
        human: h,
        csv: None,
    })
}

fn tune(ctx: &Context, device: &RisDevice, target: LengthM, style: &Style) -> CliResult<Outcome> {
    let t = tuning::min_field_for_range(
        device,
        target,
        ctx.channel.zeta(),
        ctx.detector.sensitivity(),
    )?;
    let mut doc = ReportDocument::new("tune");
    common_inputs(&mut doc, ctx)?;
    doc.input("device", device_json(device)?)
        .input("target_range", q(target.value(), "m")?);
    doc.result("knot_field", q(t.knot_field.value(), "V/um")?)
        .result("refined_field", q(t.refined_field.value(), "V/um")?)
        .result("field_resolution", q(tuning::FIELD_RESOLUTION, "V/um")?)
        .result("range_at_refined_field", q(t.range.value(), "m")?);

    let mut h = String::new();
    let _ = writeln!(
        h,
        "{}",
        style.heading(&format!(
            "tune: device {}, target {} m",
            device.id,
            target.value()
        ))
    );
    let _ = writeln!(
        h,
        "  minimum field (knot grid)     {} V/um",
        t.knot_field.value()
    );
    let _ = writeln!(
        h,
        "  minimum field (interpolated)  {:.4} V/um",
        t.refined_field.value()
    );
    let _ = writeln!(
        h,
        "  range at interpolated field   {:.4} m",
        t.range.value()
    );
    Ok(Outcome {
        report: doc,
        human: h,
        csv: None,
    })
}

fn peak(ctx: &Context, device: &RisDevice, style: &Style) -> CliResult<Outcome> {
    let e0 = tuning::peak_gain_field(device);
    let t = crate::ris_device::transmittance_at(&device.curve, e0)?;
    let gain = ratio_to_db(t).value();
    let range = 10.0 / ctx.channel.zeta_db_per_m() * t.value().log10();
    let mut doc = ReportDocument::new("peak");
    common_inputs(&mut doc, ctx)?;
    doc.input("device", device_json(device)?);
    doc.result("peak_field", q(e0.value(), "V/um")?)
        .result("peak_transmittance", q(t.value(), "ratio")?)
        .result("peak_gain", q(gain, "dB")?)
        .result("range_extension", q(range, "m")?);

    let mut h = String::new();
    let _ = writeln!(
        h,
        "{}",
        style.heading(&format!("peak: device {}", device.id))
    );
    let _ = writeln!(h, "  peak field        {} V/um", e0.value());
    let _ = writeln!(h, "  transmittance     {:.6}", t.value());
    let _ = writeln!(h, "  gain              {gain:.6} dB");
    let _ = writeln!(h, "  range extension   {range:.4} m");
    Ok(Outcome {
        report: doc,
        human: h,
        csv: None,
    })
}

fn validate(
    ctx: &Context,
    rows: &[tuning::Table1Row],
    tol: Tolerances,
    style: &Style,
) -> CliResult<Outcome> {
    let rep = tuning::validate_table(rows, ctx.channel.zeta(), tol)?;
    let mut doc = ReportDocument::new("validate-table");
    common_inputs(&mut doc, ctx)?;
    doc.input("gain_tol", q(tol.gain_db, "dB")?)
        .input("range_tol", q(tol.range_rel, "ratio")?)
        .input("range_abs_tol", q(tol.range_abs, "m")?)
        .input("rows", q(rows.len() as f64, "count")?);

    let mut items = Vec::with_capacity(rep.rows.len());
    let mut h = String::new();
    let _ = writeln!(
        h,
        "{}",
        style.heading(&format!(
            "validate-table: zeta = {} dB/m",
            rep.zeta_db_per_m
        ))
    );
    let _ = writeln!(
        h,
        "  {:<12} {:>5} {:>10} {:>10} {:>8} {:>8}  flags",
        "mixture", "E0", "gain", "listed", "range", "listed"
    );
    for (check, row) in rep.rows.iter().zip(rows) {
        let flags: Vec<String> = check.flags.iter().map(|f| format!("{f:?}")).collect();
        let mut item = json!({
            "mixture": check.mixture,
            "e0": q(check.e0.value(), "V/um")?,
            "listed_gain": q(row.listed_gain.value(), "dB")?,
            "listed_range": q(row.listed_range.value(), "m")?,
            "recomputed_gain": q(check.recomputed_gain_db, "dB")?,
            "recomputed_range": q(check.recomputed_range_m, "m")?,
            "gain_abs_dev": q(check.gain_abs_dev_db, "dB")?,
            "range_abs_dev": q(check.range_abs_dev_m, "m")?,
            "flags": flags,
        });
        if let Some(r) = check.range_rel_dev {
            item["range_rel_dev"] = q(r, "ratio")?;
        }
        items.push(item);
        let _ = writeln!(
            h,
            "  {:<12} {:>5} {:>10.4} {:>10.4} {:>8.2} {:>8.2}  {}",
            check.mixture,
            check.e0.value(),
            check.recomputed_gain_db,
            row.listed_gain.value(),
            check.recomputed_range_m,
            row.listed_range.value(),
            flags.join(",")
        );
    }
    let gm = rep.count(Mismatch::GainMismatch);
    let rm = rep.count(Mismatch::RangeMismatch);
    doc.result("rows", Value::Array(items))
        .result("gain_mismatches", q(gm as f64, "count")?)
        .result("range_mismatches", q(rm as f64, "count")?);
    let _ = writeln!(
        h,
        "  {} rows, {gm} gain mismatches, {rm} range mismatches",
        rep.rows.len()
    );
    Ok(Outcome {
        report: doc,
        human: h,
        csv: None,
    })
}
