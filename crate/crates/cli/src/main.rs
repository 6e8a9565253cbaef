use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use serde::Serialize;
use wmfatigue::config::{RunConfig, SCHEMA};
use wmfatigue::eval::{
    compare_detectors, load_cohort_dir, sweep, synth_cohort, write_sweep_csv, CohortSpec, SweepSpec,
};
use wmfatigue::io::{
    load_annotations, load_recording, load_trajectory, write_recording, write_report, write_trajectory_csv,
    RecordingFormat,
};
use wmfatigue::spectral::{band_range_hz, band_trajectories, feature_trajectory, one_way_anova, probe_groups};
use wmfatigue::synth::{ground_truth_series, synth_emg, SynthSpec, SPEC_KEYS};
use wmfatigue::trend::{detect_threshold, detect_wm, DetectorKind};
use wmfatigue::Error;

mod plot;

const ENV_CONFIG: &str = "WMFATIGUE_CONFIG";

enum Failure {
    Usage(String),
    Runtime(Error),
    Miss,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Usage(m),
            other => Failure::Runtime(other),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn spec_help() -> String {
    let mut s = String::from("Config keys (flags, config files and $WMFATIGUE_CONFIG use `key = value`):\n");
    for d in SCHEMA {
        s += &format!("  {:<26} {:<12} {}\n", d.key, d.default, d.help);
    }
    s += "\nSynth spec keys (synth --spec, eval --cohort, sweep --spec):\n";
    for (k, h) in SPEC_KEYS {
        s += &format!("  {k:<26} {h}\n");
    }
    s += "\nCohort keys (eval --cohort, sweep --spec):\n";
    s += "  cohort.size                members per cohort (default 20)\n";
    s += "  cohort.channel             channel analysed (default ch1)\n";
    s += "  cohort.band                packet band or `full` (default 5)\n";
    s += "\nSweep grid keys (sweep --spec), comma-separated lists:\n";
    s += "  grid.delta_r  grid.f_th_hz  grid.wm_th  grid.noise_snr_db\n";
    s += "\nExit codes: 0 ok, 1 no detection with --fail-on-miss, 2 usage or config error, 3 runtime error.\n";
    s
}

fn config_args() -> Vec<Arg> {
    let mut args = vec![Arg::new("config")
        .long("config")
        .value_name("FILE")
        .global(true)
        .value_parser(value_parser!(PathBuf))
        .help(format!("key = value config file (default: ${ENV_CONFIG})"))];
    for d in SCHEMA {
        args.push(
            Arg::new(d.key)
                .long(d.flag())
                .value_name("VALUE")
                .global(true)
                .hide_short_help(true)
                .help_heading("Config keys")
                .help(format!("{} [default: {}]", d.help, d.default)),
        );
    }
    args
}

fn cli() -> Command {
    let input = || {
        Arg::new("input")
            .long("input")
            .short('i')
            .required(true)
            .value_parser(value_parser!(PathBuf))
    };
    let out = |help: &'static str| {
        Arg::new("out")
            .long("out")
            .short('o')
            .value_parser(value_parser!(PathBuf))
            .help(help)
    };
    Command::new("wmfatigue")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Muscle-fatigue detection from sEMG median-frequency trends")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .after_help(spec_help())
        .args(config_args())
        .subcommand(
            Command::new("ingest")
                .about("Validate a recording and print a summary")
                .arg(input().help("recording CSV"))
                .arg(
                    Arg::new("annotations")
                        .long("annotations")
                        .value_parser(value_parser!(PathBuf)),
                )
                .arg(out("summary JSON (default: stdout)")),
        )
        .subcommand(
            Command::new("features")
                .about("Median-frequency trajectory of one channel")
                .arg(input().help("recording CSV"))
                .arg(Arg::new("channel").long("channel").required(true))
                .arg(
                    Arg::new("band")
                        .long("band")
                        .default_value("5")
                        .help("1-based packet band, or `full` for no decomposition"),
                )
                .arg(out("trajectory CSV (default: stdout)")),
        )
        .subcommand(
            Command::new("select-band")
                .about("Rank (channel, band) pairs by one-way ANOVA over the probe minutes")
                .arg(input().help("recording CSV"))
                .arg(
                    Arg::new("channel")
                        .long("channel")
                        .action(ArgAction::Append)
                        .help("restrict to these channels (repeatable)"),
                )
                .arg(out("ranking CSV (default: stdout)")),
        )
        .subcommand(
            Command::new("detect")
                .about("Run a fatigue detector on a trajectory CSV")
                .arg(input().help("trajectory CSV (T_s,F_hz)"))
                .arg(
                    Arg::new("detector")
                        .long("detector")
                        .default_value("wm")
                        .value_parser(["wm", "threshold"]),
                )
                .arg(out("report JSON; a per-segment CSV is written next to it").default_value("report.json"))
                .arg(
                    Arg::new("svg")
                        .long("svg")
                        .value_parser(value_parser!(PathBuf))
                        .help("also write an SVG plot"),
                )
                .arg(
                    Arg::new("fail-on-miss")
                        .long("fail-on-miss")
                        .action(ArgAction::SetTrue)
                        .help("exit 1 when the detector does not fire"),
                ),
        )
        .subcommand(
            Command::new("synth")
                .about("Generate a synthetic recording and its ground-truth median frequency")
                .arg(
                    Arg::new("spec")
                        .long("spec")
                        .value_parser(value_parser!(PathBuf))
                        .help("synth spec (default: built-in defaults)"),
                )
                .arg(out("recording CSV; ground truth goes to <stem>.truth.csv").required(true)),
        )
        .subcommand(
            Command::new("eval")
                .about("Compare both detectors over a cohort")
                .arg(
                    Arg::new("trajectories")
                        .long("trajectories")
                        .value_parser(value_parser!(PathBuf))
                        .help("directory of trajectory CSVs"),
                )
                .arg(
                    Arg::new("cohort")
                        .long("cohort")
                        .value_parser(value_parser!(PathBuf))
                        .help("synthetic cohort spec"),
                )
                .group(
                    clap::ArgGroup::new("source")
                        .args(["trajectories", "cohort"])
                        .required(true),
                )
                .arg(
                    Arg::new("out-dir")
                        .long("out-dir")
                        .required(true)
                        .value_parser(value_parser!(PathBuf))
                        .help("receives report.json and table.txt"),
                ),
        )
        .subcommand(
            Command::new("sweep")
                .about("Detection and false-alarm rates over a parameter grid")
                .arg(
                    Arg::new("spec")
                        .long("spec")
                        .required(true)
                        .value_parser(value_parser!(PathBuf)),
                )
                .arg(out("sweep CSV").default_value("sweep.csv")),
        )
}

fn run_config(m: &ArgMatches) -> Result<RunConfig, Failure> {
    let mut rc = RunConfig::default();
    let file = m.get_one::<PathBuf>("config").cloned().or_else(|| {
        std::env::var_os(ENV_CONFIG)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    });
    if let Some(path) = file {
        rc.merge_file(&path).map_err(|e| match e {
            Error::Io { .. } => Failure::Usage(e.to_string()),
            other => Failure::from(other),
        })?;
    }
    for d in SCHEMA {
        if let Some(v) = m.get_one::<String>(d.key) {
            rc.set(d.key, v)?;
        }
    }
    rc.validate()?;
    Ok(rc)
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&PathBuf>, bytes: &[u8]) -> CmdResult {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| {
            Failure::Runtime(Error::Io {
                path: p.clone(),
                source: e,
            })
        }),
        None => std::io::stdout().write_all(bytes).map_err(|e| {
            Failure::Runtime(Error::Io {
                path: "<stdout>".into(),
                source: e,
            })
        }),
    }
}

#[derive(Serialize)]
struct ChannelSummary<'a> {
    label: &'a str,
    mean: f64,
    rms: f64,
}

#[derive(Serialize)]
struct IngestSummary<'a> {
    sample_rate_hz: f64,
    samples: usize,
    duration_s: f64,
    channels: Vec<ChannelSummary<'a>>,
    annotations: Option<usize>,
}

fn cmd_ingest(m: &ArgMatches) -> CmdResult {
    let rec = load_recording(m.get_one::<PathBuf>("input").unwrap(), RecordingFormat::Csv)?;
    let annotations = match m.get_one::<PathBuf>("annotations") {
        Some(p) => Some(load_annotations(p)?.events().len()),
        None => None,
    };
    let channels = rec
        .channels()
        .iter()
        .map(|c| {
            let n = c.samples.len() as f64;
            ChannelSummary {
                label: &c.label,
                mean: c.samples.iter().sum::<f64>() / n,
                rms: (c.samples.iter().map(|v| v * v).sum::<f64>() / n).sqrt(),
            }
        })
        .collect();
    let summary = IngestSummary {
        sample_rate_hz: rec.sample_rate_hz(),
        samples: rec.len(),
        duration_s: rec.duration_s(),
        channels,
        annotations,
    };
    let text = serde_json::to_string_pretty(&summary).map_err(Error::from)? + "\n";
    write_output(m.get_one("out"), text.as_bytes())
}

fn parse_band(s: &str) -> Result<Option<usize>, Failure> {
    if s == "full" {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Failure::Usage(format!("--band expects a band number or `full`, got `{s}`")))
}

fn cmd_features(m: &ArgMatches, rc: &RunConfig) -> CmdResult {
    let rec = load_recording(m.get_one::<PathBuf>("input").unwrap(), RecordingFormat::Csv)?;
    let band = parse_band(m.get_one::<String>("band").unwrap())?;
    let traj = feature_trajectory(&rec, m.get_one::<String>("channel").unwrap(), band, &rc.pipeline())?;
    let mut buf = Vec::new();
    write_trajectory_csv(&traj, &mut buf).map_err(|e| {
        Failure::Runtime(Error::Io {
            path: "<buffer>".into(),
            source: e,
        })
    })?;
    write_output(m.get_one("out"), &buf)
}

fn cmd_select_band(m: &ArgMatches, rc: &RunConfig) -> CmdResult {
    let rec = load_recording(m.get_one::<PathBuf>("input").unwrap(), RecordingFormat::Csv)?;
    let cfg = rc.pipeline();
    let channels: Vec<String> = match m.get_many::<String>("channel") {
        Some(v) => v.cloned().collect(),
        None => rec.channels().iter().map(|c| c.label.clone()).collect(),
    };
    let probes: Vec<f64> = rc.probe_minutes().iter().map(|&v| v as f64).collect();
    let alpha = rc.anova_alpha();

    let mut rows = Vec::new();
    for ch in &channels {
        for traj in band_trajectories(&rec, ch, &cfg)? {
            let groups = probe_groups(&traj, &probes, cfg.preprocess.segment_len_s);
            let res = one_way_anova(&groups)?;
            let band = traj.band_index().unwrap();
            rows.push((ch.clone(), band, res));
        }
    }
    rows.sort_by(|a, b| {
        a.2.p_value
            .total_cmp(&b.2.p_value)
            .then_with(|| a.0.cmp(&b.0))
            .then_with(|| a.1.cmp(&b.1))
    });
    let mut out = String::from("channel,band,lo_hz,hi_hz,f_statistic,p_value,selected\n");
    for (ch, band, res) in rows {
        let (lo, hi) = band_range_hz(rec.sample_rate_hz(), cfg.spectral.depth, band);
        out += &format!(
            "{ch},{band},{lo},{hi},{},{},{}\n",
            res.f_statistic,
            res.p_value,
            res.p_value < alpha
        );
    }
    write_output(m.get_one("out"), out.as_bytes())
}

fn cmd_detect(m: &ArgMatches, rc: &RunConfig) -> CmdResult {
    let traj = load_trajectory(m.get_one::<PathBuf>("input").unwrap())?;
    let kind: DetectorKind = m.get_one::<String>("detector").unwrap().parse()?;
    let result = match kind {
        DetectorKind::Wm => detect_wm(&traj, &rc.wm_params())?,
        DetectorKind::Threshold => {
            let p = rc.threshold_params();
            detect_threshold(&traj, p.theta_hz, p.baseline_window_s)?
        }
    };
    write_report(&result, &traj, m.get_one::<PathBuf>("out").unwrap())?;
    if let Some(svg) = m.get_one::<PathBuf>("svg") {
        write_output(Some(svg), plot::trajectory_svg(&traj, &result).as_bytes())?;
    }
    match result.time_s {
        Some(t) => eprintln!("{kind}: fatigue detected at {t} s"),
        None => eprintln!("{kind}: no detection"),
    }
    if !result.detected && m.get_flag("fail-on-miss") {
        return Err(Failure::Miss);
    }
    Ok(())
}

fn truth_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.truth.csv"))
}

fn cmd_synth(m: &ArgMatches) -> CmdResult {
    let spec = match m.get_one::<PathBuf>("spec") {
        Some(p) => SynthSpec::from_kv_str(&read_text(p)?)?,
        None => SynthSpec::default(),
    };
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let out = m.get_one::<PathBuf>("out").unwrap();
    let rec = synth_emg(&spec)?;
    write_recording(&rec, out)?;
    let mut truth = String::from("t_s,mdf_hz\n");
    for (t, f) in ground_truth_series(&spec)? {
        truth += &format!("{t},{f}\n");
    }
    write_output(Some(&truth_path(out)), truth.as_bytes())
}

fn cmd_eval(m: &ArgMatches, rc: &RunConfig) -> CmdResult {
    let cohort = if let Some(dir) = m.get_one::<PathBuf>("trajectories") {
        load_cohort_dir(dir)?
    } else {
        let path = m.get_one::<PathBuf>("cohort").unwrap();
        let spec = CohortSpec::from_kv_str(&read_text(path)?)?;
        synth_cohort(&spec, &rc.pipeline())?
    };
    if cohort.is_empty() {
        return Err(Failure::Usage("cohort is empty".into()));
    }
    let report = compare_detectors(&cohort, &rc.wm_params(), rc.threshold_params().theta_hz)?;
    report.write(m.get_one::<PathBuf>("out-dir").unwrap())?;
    eprint!("{}", report.to_table());
    Ok(())
}

fn cmd_sweep(m: &ArgMatches, rc: &RunConfig) -> CmdResult {
    let spec = SweepSpec::from_kv_str(&read_text(m.get_one::<PathBuf>("spec").unwrap())?)?;
    let rows = sweep(&spec, &rc.wm_params(), &rc.pipeline())?;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf)?;
    write_output(m.get_one("out"), &buf)
}

fn dispatch(m: &ArgMatches) -> CmdResult {
    let (name, sub) = m.subcommand().expect("subcommand required");
    let rc = run_config(sub)?;
    match name {
        "ingest" => cmd_ingest(sub),
        "features" => cmd_features(sub, &rc),
        "select-band" => cmd_select_band(sub, &rc),
        "detect" => cmd_detect(sub, &rc),
        "synth" => cmd_synth(sub),
        "eval" => cmd_eval(sub, &rc),
        "sweep" => cmd_sweep(sub, &rc),
        _ => unreachable!("unknown subcommand {name}"),
    }
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    match dispatch(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Miss) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{}", spec_help());
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
