//! `qcdperf` command-line front end.

pub mod args;
pub mod commands;
pub mod manifest;
pub mod plot;
pub mod schema;
pub mod units;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Parser;
use log::info;

use args::{Cli, Command};
use commands::Output;
use manifest::{manifest_path, sibling, RunManifest};
use schema::Table;

/// Exit codes: 0 success, 1 numerical or validation failure, 2 usage or configuration error.
pub fn run(argv: Vec<OsString>) -> u8 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.exit_code() {
                0 => 0,
                _ => 2,
            };
        }
    };
    match dispatch(&cli, &argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn dispatch(cli: &Cli, argv: &[OsString]) -> Result<u8> {
    match (&cli.replay, &cli.command) {
        (Some(_), Some(_)) => bail!("--replay takes no subcommand"),
        (Some(m), None) => replay(cli, m),
        (None, Some(cmd)) => execute(cli, cmd, argv, None).map(|(code, _)| code),
        (None, None) => bail!("no command given; see `qcdperf --help`"),
    }
}

fn produce(cmd: &Command) -> Result<Option<Output>> {
    Ok(Some(match cmd {
        Command::Qcdstream(a) => commands::qcdstream(a)?,
        Command::Stream(a) => commands::stream(a)?,
        Command::Smp(a) => commands::smp(a)?,
        Command::Inverter(a) => commands::inverter(a)?,
        Command::Model(m) => commands::model(m)?,
        Command::SchemaCheck(_) => return Ok(None),
    }))
}

/// Runs one command and writes its files; returns the exit code and CSV path.
fn execute(cli: &Cli, cmd: &Command, argv: &[OsString], replay_of: Option<&Path>) -> Result<(u8, Option<PathBuf>)> {
    if let Command::SchemaCheck(a) = cmd {
        return Ok((commands::schema_check(a), None));
    }
    let out = produce(cmd)?.expect("benchmark and model commands produce output");
    let csv = cli.out.clone().unwrap_or_else(|| commands::default_out(cmd.name()));
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let body = out.schema.render(&out.rows);
    std::fs::write(&csv, &body).with_context(|| format!("writing {}", csv.display()))?;

    let mut m = RunManifest::new();
    m.set("schema", out.schema.id());
    m.set("version", env!("CARGO_PKG_VERSION"));
    m.set("timestamp", chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    m.set("output", csv.display());
    m.set("seeds", units::join(&out.seeds));
    let original: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    m.set("command_line", serde_json::to_string(&original)?);
    m.set("args", serde_json::to_string(&out.resolved.argv)?);
    for (k, v) in &out.resolved.options {
        m.set(format!("opt.{k}"), v);
    }
    for (k, v) in &out.notes {
        m.set(format!("note.{k}"), v);
    }
    if let Some(p) = replay_of {
        m.set("replay_of", p.display());
    }
    if let Some(host) = &out.host {
        m.set_host(host);
        let json = sibling(&csv, "machine.json");
        std::fs::write(&json, host.to_json()).with_context(|| format!("writing {}", json.display()))?;
        m.set("machine_profile", json.display());
    }
    m.write(&manifest_path(&csv))?;

    if cli.plot || cli.compare {
        let name = |p: &Path| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        let reference = if cli.compare { out.plot.reference() } else { None };
        let ref_path = reference.map(|table| -> Result<PathBuf> {
            let p = sibling(&csv, "reference.csv");
            std::fs::write(&p, table).with_context(|| format!("writing {}", p.display()))?;
            Ok(p)
        });
        let ref_path = ref_path.transpose()?;
        if cli.compare && reference.is_none() {
            info!("no reference table for {}; plotting this run only", cmd.name());
        }
        let gp = sibling(&csv, "gp");
        let text = plot::script(&out.plot, &name(&csv), &out.title, ref_path.as_deref().map(name).as_deref());
        std::fs::write(&gp, text).with_context(|| format!("writing {}", gp.display()))?;
        eprintln!("plot script: {}", gp.display());
    }
    print!("{body}");
    eprintln!("wrote {} ({} rows)", csv.display(), out.rows.len());
    Ok((out.code, Some(csv)))
}

fn replay(cli: &Cli, manifest: &Path) -> Result<u8> {
    let m = RunManifest::read(manifest)?;
    let original = m.output()?;
    let mut argv: Vec<OsString> = vec!["qcdperf".into()];
    argv.extend(m.args()?.into_iter().map(OsString::from));
    let recorded = Cli::try_parse_from(&argv).with_context(|| format!("manifest args no longer parse: {argv:?}"))?;
    let cmd = recorded.command.clone().context("manifest args name no command")?;
    let out = cli.out.clone().unwrap_or_else(|| replay_path(&original));
    if out == original {
        bail!("replay output would overwrite the original {}", original.display());
    }
    let target = Cli { out: Some(out), plot: cli.plot, compare: cli.compare, replay: None, command: Some(cmd.clone()) };
    let (code, csv) = execute(&target, &cmd, &argv, Some(manifest))?;
    let csv = csv.context("replayed command wrote no CSV")?;
    let before = Table::read(&original).with_context(|| format!("reading original output {}", original.display()))?;
    let after = Table::read(&csv)?;
    let diff = before.deterministic_diff(&after);
    if diff.is_empty() {
        eprintln!("replay matches {} in every deterministic column", original.display());
        Ok(code)
    } else {
        for d in &diff {
            eprintln!("replay mismatch: {d}");
        }
        Ok(1)
    }
}

/// `<dir>/<stem>.replay.csv` next to the original.
fn replay_path(original: &Path) -> PathBuf {
    let stem = original.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    original.with_file_name(format!("{stem}.replay.csv"))
}
