//! Scenario files (TOML), multipath CSV import and results export.
//!
//! Angles are degrees in files and radians everywhere else.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{ArrayGeometry, ChannelModel, ClusterSpec, MpcSpec, RankPolicy, UserProfile};
use crate::error::{Error, Result};
use crate::eval::{db_to_linear, Algorithm, BeamWidth, EvalConfig, EvalResult, Grid, Mode, Scenario, SlotPower};
use crate::grouping::SetFunction;

pub const DEFAULT_SPACING: f64 = 0.5;
pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_NOISE_DBM: f64 = -100.0;

/// Header of multipath CSV files.
pub const MPC_HEADER: [&str; 5] = ["user_id", "power_dbm", "delay_ns", "aod_deg", "aoa_deg"];

/// Header of results CSV files.
pub const RESULTS_HEADER: &str =
    "grid_db,mode,algorithm,sum_rate_bps_hz,sum_rate_stderr,users_served_mean";

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub geometry: Option<GeometryFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub profiles: Vec<ProfileFile>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryFile {
    #[serde(rename = "M")]
    pub m: Option<i64>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_linear: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot_power: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beam_width: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_policy: Option<RankPolicyFile>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankPolicyFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_threshold: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub users: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clusters: Option<Vec<ClusterFile>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mpcs: Option<Vec<MpcFile>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterFile {
    pub azimuth_deg: Option<f64>,
    pub spread_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpcFile {
    pub power_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_ns: Option<f64>,
    pub aod_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aoa_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_rad: Option<f64>,
}

fn schema(path: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        reason: reason.into(),
    }
}

fn required<T>(v: Option<T>, path: &str) -> Result<T> {
    v.ok_or_else(|| schema(path, "missing required field"))
}

fn finite(v: f64, path: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(schema(path, "must be finite"))
    }
}

fn angle(v: f64, path: &str) -> Result<f64> {
    if v > -90.0 && v < 90.0 {
        Ok(v.to_radians())
    } else {
        Err(schema(path, format!("{v} is outside (-90, 90) degrees")))
    }
}

fn positive_count(v: i64, path: &str) -> Result<usize> {
    if v >= 1 {
        Ok(v as usize)
    } else {
        Err(schema(path, format!("{v} must be a positive integer")))
    }
}

/// Parse and validate a scenario document. Returns the scenario and a
/// human-readable list of the defaults that were filled in.
pub fn parse_scenario(text: &str, fallback_name: &str) -> Result<(Scenario, Vec<String>)> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut defaults = Vec::new();

    let geo = required(file.geometry, "geometry")?;
    let m = positive_count(required(geo.m, "geometry.M")?, "geometry.M")?;
    let d = match geo.d {
        Some(d) => finite(d, "geometry.D")?,
        None => {
            defaults.push(format!("geometry.D = {DEFAULT_SPACING}"));
            DEFAULT_SPACING
        }
    };
    let geometry = ArrayGeometry::new(m, d).map_err(|e| schema("geometry", e.to_string()))?;

    let ev = file.eval.unwrap_or_default();
    let grid = match (ev.snr_db, ev.tx_power_dbm) {
        (Some(_), Some(_)) => {
            return Err(schema("eval", "snr_db and tx_power_dbm are mutually exclusive"))
        }
        (None, None) => return Err(schema("eval", "one of snr_db or tx_power_dbm is required")),
        (Some(v), None) => Grid::SnrDb(v),
        (None, Some(v)) => Grid::TxPowerDbm(v),
    };
    let noise = match (ev.noise_dbm, ev.noise_linear, &grid) {
        (Some(_), Some(_), _) => {
            return Err(schema("eval", "noise_dbm and noise_linear are mutually exclusive"))
        }
        (Some(db), None, _) => db_to_linear(finite(db, "eval.noise_dbm")?),
        (None, Some(l), _) => l,
        (None, None, Grid::SnrDb(_)) => {
            defaults.push("eval.noise_linear = 1".into());
            1.0
        }
        (None, None, Grid::TxPowerDbm(_)) => {
            defaults.push(format!("eval.noise_dbm = {DEFAULT_NOISE_DBM}"));
            db_to_linear(DEFAULT_NOISE_DBM)
        }
    };
    let mut config = EvalConfig::new(grid);
    config.noise = noise;
    match ev.trials {
        Some(t) => config.trials = positive_count(t, "eval.trials")?,
        None => defaults.push(format!("eval.trials = {DEFAULT_TRIALS}")),
    }
    if let Some(s) = ev.seed {
        config.seed = s;
    }
    if let Some(mode) = ev.mode {
        config.mode = mode.parse().map_err(|e: Error| schema("eval.mode", e.to_string()))?;
    }
    if let Some(a) = ev.algorithm {
        config.algorithm = a.parse().map_err(|e: Error| schema("eval.algorithm", e.to_string()))?;
    }
    if let Some(e) = ev.epsilon {
        config.epsilon = finite(e, "eval.epsilon")?;
    }
    config.set_function = match ev.set_function.as_deref() {
        None | Some("density") => SetFunction::Density,
        Some("measure") => SetFunction::Measure,
        Some(o) => return Err(schema("eval.set_function", format!("unknown value `{o}`"))),
    };
    config.slot_power = match ev.slot_power.as_deref() {
        None | Some("full") => SlotPower::Full,
        Some("split") => SlotPower::Split,
        Some(o) => return Err(schema("eval.slot_power", format!("unknown value `{o}`"))),
    };
    config.beam_width = match ev.beam_width.as_deref() {
        None | Some("users") => BeamWidth::Users,
        Some("eigenmodes") => BeamWidth::Eigenmodes,
        Some(o) => return Err(schema("eval.beam_width", format!("unknown value `{o}`"))),
    };
    config.rank_policy = match ev.rank_policy {
        None => {
            defaults.push("eval.rank_policy.energy_fraction = 0.95".into());
            RankPolicy::default()
        }
        Some(RankPolicyFile {
            energy_fraction: Some(f),
            relative_threshold: None,
        }) => RankPolicy::EnergyFraction(f),
        Some(RankPolicyFile {
            energy_fraction: None,
            relative_threshold: Some(t),
        }) => RankPolicy::RelativeThreshold(t),
        Some(_) => {
            return Err(schema(
                "eval.rank_policy",
                "exactly one of energy_fraction or relative_threshold is required",
            ))
        }
    };
    config
        .validate()
        .map_err(|e| schema("eval", e.to_string()))?;

    if file.profiles.is_empty() {
        return Err(schema("profiles", "at least one profile is required"));
    }
    let profiles = file
        .profiles
        .into_iter()
        .enumerate()
        .map(|(i, p)| parse_profile(p, i, &geometry))
        .collect::<Result<Vec<_>>>()?;

    let scenario = Scenario {
        name: file.name.unwrap_or_else(|| fallback_name.to_string()),
        geometry,
        profiles,
        config,
    };
    scenario.validate()?;
    Ok((scenario, defaults))
}

fn parse_profile(p: ProfileFile, i: usize, geometry: &ArrayGeometry) -> Result<UserProfile> {
    let at = |f: &str| format!("profiles[{i}].{f}");
    let id = required(p.id, &at("id"))?;
    let model = match (p.clusters, p.mpcs) {
        (Some(_), Some(_)) => return Err(schema(at(""), "clusters and mpcs are mutually exclusive")),
        (None, None) => return Err(schema(at(""), "one of clusters or mpcs is required")),
        (Some(cs), None) => ChannelModel::Clusters(
            cs.into_iter()
                .enumerate()
                .map(|(j, c)| {
                    let at = |f: &str| format!("profiles[{i}].clusters[{j}].{f}");
                    Ok(ClusterSpec {
                        azimuth: angle(required(c.azimuth_deg, &at("azimuth_deg"))?, &at("azimuth_deg"))?,
                        spread: finite(required(c.spread_deg, &at("spread_deg"))?, &at("spread_deg"))?
                            .to_radians(),
                        weight: finite(c.weight.unwrap_or(1.0), &at("weight"))?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        (None, Some(ms)) => ChannelModel::DiscreteMpcs(
            ms.into_iter()
                .enumerate()
                .map(|(j, m)| {
                    let at = |f: &str| format!("profiles[{i}].mpcs[{j}].{f}");
                    Ok(MpcSpec {
                        power: db_to_linear(finite(required(m.power_db, &at("power_db"))?, &at("power_db"))?),
                        phase: m.phase_rad.map(|v| finite(v, &at("phase_rad"))).transpose()?,
                        delay: finite(m.delay_ns.unwrap_or(0.0), &at("delay_ns"))?,
                        aod: angle(required(m.aod_deg, &at("aod_deg"))?, &at("aod_deg"))?,
                        aoa: m.aoa_deg.map(|v| angle(v, &at("aoa_deg"))).transpose()?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let profile = UserProfile {
        id,
        users: positive_count(p.users.unwrap_or(1), &at("users"))?,
        gain: db_to_linear(finite(p.gain_db.unwrap_or(0.0), &at("gain_db"))?),
        model,
    };
    profile
        .validate(geometry)
        .map_err(|e| schema(format!("profiles[{i}]"), e.to_string()))?;
    Ok(profile)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into())
}

/// Load a scenario file, applying defaults.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    load_scenario_verbose(path).map(|(s, _)| s)
}

/// Like [`load_scenario`], also returning the defaults that were applied.
pub fn load_scenario_verbose(path: impl AsRef<Path>) -> Result<(Scenario, Vec<String>)> {
    let path = path.as_ref();
    let text = read(path)?;
    parse_scenario(&text, &file_stem(path)).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn profile_file(p: &UserProfile) -> ProfileFile {
    let mut f = ProfileFile {
        id: Some(p.id.clone()),
        users: Some(p.users as i64),
        gain_db: Some(linear_to_db(p.gain)),
        ..Default::default()
    };
    match &p.model {
        ChannelModel::Clusters(cs) => {
            f.clusters = Some(
                cs.iter()
                    .map(|c| ClusterFile {
                        azimuth_deg: Some(c.azimuth.to_degrees()),
                        spread_deg: Some(c.spread.to_degrees()),
                        weight: Some(c.weight),
                    })
                    .collect(),
            )
        }
        ChannelModel::DiscreteMpcs(ms) => {
            f.mpcs = Some(
                ms.iter()
                    .map(|m| MpcFile {
                        power_db: Some(linear_to_db(m.power)),
                        delay_ns: Some(m.delay),
                        aod_deg: Some(m.aod.to_degrees()),
                        aoa_deg: m.aoa.map(f64::to_degrees),
                        phase_rad: m.phase,
                    })
                    .collect(),
            )
        }
    }
    f
}

/// Render profiles as a TOML fragment of `[[profiles]]` tables.
pub fn profiles_to_toml(profiles: &[UserProfile]) -> Result<String> {
    let file = ScenarioFile {
        profiles: profiles.iter().map(profile_file).collect(),
        ..Default::default()
    };
    toml::to_string(&file).map_err(|e| Error::Parse(e.to_string()))
}

/// Render a fully explicit scenario document (every default written out).
pub fn scenario_to_toml(s: &Scenario) -> Result<String> {
    let c = &s.config;
    let (snr_db, tx_power_dbm) = match &c.grid {
        Grid::SnrDb(v) => (Some(v.clone()), None),
        Grid::TxPowerDbm(v) => (None, Some(v.clone())),
    };
    let file = ScenarioFile {
        name: Some(s.name.clone()),
        geometry: Some(GeometryFile {
            m: Some(s.geometry.antennas() as i64),
            d: Some(s.geometry.spacing()),
        }),
        eval: Some(EvalFile {
            mode: Some(c.mode.name().into()),
            algorithm: Some(c.algorithm.name().into()),
            epsilon: Some(c.epsilon),
            snr_db,
            tx_power_dbm,
            noise_dbm: None,
            noise_linear: Some(c.noise),
            trials: Some(c.trials as i64),
            seed: Some(c.seed),
            set_function: Some(
                match c.set_function {
                    SetFunction::Density => "density",
                    SetFunction::Measure => "measure",
                }
                .into(),
            ),
            slot_power: Some(
                match c.slot_power {
                    SlotPower::Full => "full",
                    SlotPower::Split => "split",
                }
                .into(),
            ),
            beam_width: Some(
                match c.beam_width {
                    BeamWidth::Users => "users",
                    BeamWidth::Eigenmodes => "eigenmodes",
                }
                .into(),
            ),
            rank_policy: Some(match c.rank_policy {
                RankPolicy::EnergyFraction(f) => RankPolicyFile {
                    energy_fraction: Some(f),
                    relative_threshold: None,
                },
                RankPolicy::RelativeThreshold(t) => RankPolicyFile {
                    energy_fraction: None,
                    relative_threshold: Some(t),
                },
            }),
        }),
        profiles: s.profiles.iter().map(profile_file).collect(),
    };
    toml::to_string(&file).map_err(|e| Error::Parse(e.to_string()))
}

pub fn save_scenario(s: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &scenario_to_toml(s)?)
}

/// Read a multipath CSV into one discrete-MPC profile per user, in order of
/// first appearance. Powers are converted from dBm and normalised to sum to
/// one per user.
pub fn import_mpc_csv(path: impl AsRef<Path>, geometry: &ArrayGeometry) -> Result<Vec<UserProfile>> {
    import_mpc_csv_with_reference(path, geometry, None)
}

/// Like [`import_mpc_csv`]. With a reference transmit power (dBm) the
/// total received power of each user, relative to it, becomes the profile
/// gain.
pub fn import_mpc_csv_with_reference(
    path: impl AsRef<Path>,
    geometry: &ArrayGeometry,
    reference_tx_dbm: Option<f64>,
) -> Result<Vec<UserProfile>> {
    let path = path.as_ref();
    let text = read(path)?;
    parse_mpc_csv(&text, geometry, reference_tx_dbm)
        .map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
}

pub fn parse_mpc_csv(
    text: &str,
    geometry: &ArrayGeometry,
    reference_tx_dbm: Option<f64>,
) -> Result<Vec<UserProfile>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::None)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if header.iter().ne(MPC_HEADER.iter().copied()) {
        return Err(Error::Parse(format!(
            "unexpected header `{}`, expected `{}`",
            header.iter().collect::<Vec<_>>().join(","),
            MPC_HEADER.join(",")
        )));
    }
    let mut users: Vec<(String, Vec<MpcSpec>)> = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let line = row + 2;
        let rec = rec.map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
        let num = |col: usize| -> Result<f64> {
            let raw = rec.get(col).unwrap_or("");
            raw.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    Error::Parse(format!("line {line}: {} `{raw}` is not a number", MPC_HEADER[col]))
                })
        };
        let id = rec.get(0).unwrap_or("").trim().to_string();
        if id.is_empty() {
            return Err(Error::Parse(format!("line {line}: empty user_id")));
        }
        let in_range = |v: f64, col: usize| -> Result<f64> {
            if v > -90.0 && v < 90.0 {
                Ok(v.to_radians())
            } else {
                Err(Error::Parse(format!(
                    "line {line}: {} {v} outside (-90, 90) degrees",
                    MPC_HEADER[col]
                )))
            }
        };
        let mpc = MpcSpec {
            power: db_to_linear(num(1)?),
            phase: None,
            delay: num(2)?,
            aod: in_range(num(3)?, 3)?,
            aoa: Some(in_range(num(4)?, 4)?),
        };
        match users.iter_mut().find(|u| u.0 == id) {
            Some(u) => u.1.push(mpc),
            None => users.push((id, vec![mpc])),
        }
    }
    users
        .into_iter()
        .map(|(id, mut mpcs)| {
            let total: f64 = mpcs.iter().map(|m| m.power).sum();
            if total <= 0.0 {
                return Err(Error::Parse(format!("user `{id}` has no received power")));
            }
            for m in &mut mpcs {
                m.power /= total;
            }
            let mut p = UserProfile::mpcs(id, mpcs);
            if let Some(tx) = reference_tx_dbm {
                p.gain = total / db_to_linear(tx);
            }
            p.validate(geometry)?;
            Ok(p)
        })
        .collect()
}

/// Six significant digits, fixed notation where reasonable.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let exp: i32 = sci[sci.find('e').map_or(0, |i| i + 1)..].parse().unwrap_or(0);
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// Results table as CSV text, rows sorted by grid value, mode, algorithm.
pub fn results_csv(results: &[EvalResult]) -> String {
    let mut rows: Vec<(f64, &str, &str, &crate::eval::PointResult)> = results
        .iter()
        .flat_map(|r| {
            r.points
                .iter()
                .map(move |p| (p.grid_db, r.mode.name(), r.algorithm.name(), p))
        })
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)).then(a.2.cmp(b.2)));
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for (g, mode, alg, p) in rows {
        let _ = writeln!(
            out,
            "{},{mode},{alg},{},{},{}",
            format_sig6(g),
            format_sig6(p.mean),
            format_sig6(p.stderr),
            format_sig6(p.users_served_mean)
        );
    }
    out
}

pub fn export_results(results: &[EvalResult], path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &results_csv(results))
}

/// Parse a mode list such as `multiplexing,orthogonalization`.
pub fn parse_modes(s: &str) -> Result<Vec<Mode>> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

pub fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>> {
    s.split(',').map(|t| t.trim().parse()).collect()
}
