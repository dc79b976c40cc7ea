use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use modtent::analysis::{
    bifurcation_scan, confinement_probe, estimate_lyapunov, BifurcationConfig, ConfinementConfig,
};
use modtent::maps::{iterate_orbit, MapKind, Orbit, OrbitConfig};
use modtent::seed::{derive_seed, uniform_interior};
use modtent::trng::{estimate_markov, run_suite, BitStream, PartitionRule, SUITE_MIN_BITS};
use serde_json::json;

use crate::args::{
    BifurcateArgs, BitFormat, BitsArgs, Command, ConfineArgs, LyapunovArgs, MapArgs, OrbitArgs,
    OrbitParams, ReplayArgs, TestArgs,
};
use crate::error::CliError;
use crate::output::{self, fmt_f64, write_file, RunManifest};

/// Slopes past this bound are rejected by `bifurcate`.
const BIFURCATE_SLOPE_LIMIT: f64 = 3.5;

pub fn run(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Orbit(a) => orbit(cmd, a),
        Command::Bifurcate(a) => bifurcate(cmd, a),
        Command::Lyapunov(a) => lyapunov(cmd, a),
        Command::Bits(a) => bits(cmd, a),
        Command::Test(a) => test(cmd, a),
        Command::Confine(a) => confine(cmd, a),
        Command::Replay(a) => replay(a),
    }
}

fn map_kind(args: &MapArgs) -> Result<MapKind, CliError> {
    let kind = args.kind().map_err(CliError::Usage)?;
    kind.validate(args.escape_study)?;
    Ok(kind)
}

/// An explicit `--x0`, or a uniform interior draw keyed by the seed.
fn resolve_x0(kind: &MapKind, params: &OrbitParams) -> f64 {
    params
        .x0
        .unwrap_or_else(|| uniform_interior(kind.domain(), derive_seed(params.seed, 0)))
}

fn orbit_config(kind: &MapKind, map: &MapArgs, params: &OrbitParams, steps: usize) -> OrbitConfig {
    OrbitConfig::new(resolve_x0(kind, params), steps)
        .dither(params.dither)
        .seed(params.seed)
        .escape_study(map.escape_study)
}

fn finish(mut manifest: RunManifest, outputs: &[&Path]) -> Result<(), CliError> {
    manifest.outputs = outputs.iter().map(|p| p.to_path_buf()).collect();
    manifest.write(outputs[0])?;
    Ok(())
}

fn orbit(cmd: &Command, a: &OrbitArgs) -> Result<(), CliError> {
    let kind = map_kind(&a.map)?;
    let cfg = orbit_config(&kind, &a.map, &a.orbit, a.steps).policy(a.policy.into());
    let result = iterate_orbit(&kind, &cfg)?;

    let mut notes = Vec::new();
    if let Some(step) = result.escaped_at {
        notes.push(format!("escaped at step {step}"));
    }
    if let Some(step) = result.absorbed_at_zero {
        notes.push(format!("absorbed at zero at step {step}"));
    }
    write_file(
        &a.out,
        output::orbit_csv(cfg.x0, &result.states, &notes).as_bytes(),
    )?;

    let mut manifest = RunManifest::new(cmd, a.orbit.seed, json!({ "kind": kind, "orbit": cfg }));
    manifest.notes = notes;
    finish(manifest, &[&a.out])
}

fn bifurcate(cmd: &Command, a: &BifurcateArgs) -> Result<(), CliError> {
    let limit = BIFURCATE_SLOPE_LIMIT;
    if !(a.m_lo > -limit && a.m_hi < limit) {
        return Err(CliError::Usage(format!(
            "m range [{}, {}] must lie inside (-{limit}, {limit})",
            a.m_lo, a.m_hi
        )));
    }
    let cfg = BifurcationConfig {
        m_lo: a.m_lo,
        m_hi: a.m_hi,
        n_m: a.columns,
        x_bins: a.bins,
        n_transient: a.transient,
        n_keep: a.keep,
        x0: a.x0,
        dither: a.dither,
        seed: a.seed,
        escape_study: true,
    };
    let diagram = bifurcation_scan(&cfg)?;
    let pgm_path = a.pgm.clone().unwrap_or_else(|| a.out.with_extension("pgm"));
    write_file(&a.out, output::bifurcation_csv(&diagram).as_bytes())?;
    write_file(&pgm_path, &output::bifurcation_pgm(&diagram))?;

    let mut manifest = RunManifest::new(cmd, a.seed, json!({ "bifurcation": cfg }));
    manifest.notes = output::flagged_columns(&diagram);
    finish(manifest, &[&a.out, &pgm_path])
}

fn lyapunov(cmd: &Command, a: &LyapunovArgs) -> Result<(), CliError> {
    let kind = map_kind(&a.map)?;
    let cfg = orbit_config(&kind, &a.map, &a.orbit, a.steps);
    let est = estimate_lyapunov(&kind, &cfg, a.transient)?;
    let value = json!({
        "lambda": est.lambda,
        "stderr": est.standard_error,
        "n": est.n_samples,
    });
    if a.json {
        println!("{value}");
    } else {
        println!(
            "lambda={} stderr={} n={}",
            fmt_f64(est.lambda),
            fmt_f64(est.standard_error),
            est.n_samples
        );
    }
    if let Some(out) = &a.out {
        write_file(out, format!("{value}\n").as_bytes())?;
        let manifest = RunManifest::new(
            cmd,
            a.orbit.seed,
            json!({ "kind": kind, "orbit": cfg, "n_transient": a.transient }),
        );
        finish(manifest, &[out])?;
    }
    Ok(())
}

/// Exactly `count` bits from one orbit; an escape is an error because the
/// stream would come up short.
fn orbit_bits(
    kind: &MapKind,
    cfg: &OrbitConfig,
    rule: &PartitionRule,
) -> Result<(BitStream, Option<usize>), CliError> {
    let mut orbit = Orbit::new(kind, cfg)?;
    let mut stream = BitStream::with_capacity(cfg.n_steps);
    for x in orbit.by_ref() {
        stream.push(rule.classify(x));
    }
    if let Some(step) = orbit.escaped_at() {
        return Err(modtent::Error::Escaped { step }.into());
    }
    Ok((stream, orbit.absorbed_at_zero()))
}

fn bits(cmd: &Command, a: &BitsArgs) -> Result<(), CliError> {
    if a.count == 0 {
        return Err(CliError::Usage("--count must be positive".into()));
    }
    let kind = map_kind(&a.map)?;
    let rule = PartitionRule::new(a.threshold)?;
    let cfg = orbit_config(&kind, &a.map, &a.orbit, a.count);
    let (stream, absorbed) = orbit_bits(&kind, &cfg, &rule)?;
    write_file(&a.out, &encode_bits(&stream, a.format))?;

    let mut manifest = RunManifest::new(
        cmd,
        a.orbit.seed,
        json!({ "kind": kind, "orbit": cfg, "rule": rule }),
    );
    manifest.notes.push(format!(
        "{} bits, {} ones",
        stream.len(),
        stream.count_ones()
    ));
    if let Some(step) = absorbed {
        manifest
            .notes
            .push(format!("absorbed at zero at step {step}"));
    }
    finish(manifest, &[&a.out])
}

fn encode_bits(stream: &BitStream, format: BitFormat) -> Vec<u8> {
    match format {
        BitFormat::Packed => stream.as_packed().to_vec(),
        BitFormat::Ascii => {
            let mut text = stream.to_ascii();
            text.push('\n');
            text.into_bytes()
        }
    }
}

fn read_bits(path: &Path, format: BitFormat, len: Option<usize>) -> Result<BitStream, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let stream = match format {
        BitFormat::Packed => {
            let len = len.unwrap_or(8 * bytes.len());
            BitStream::from_packed(&bytes, len)?
        }
        BitFormat::Ascii => {
            let text = std::str::from_utf8(&bytes)
                .map_err(|_| CliError::Usage(format!("{}: not ASCII", path.display())))?;
            let stream = BitStream::from_ascii(text)?;
            match len {
                Some(n) if n != stream.len() => {
                    return Err(CliError::Usage(format!(
                        "{}: expected {n} bits, found {}",
                        path.display(),
                        stream.len()
                    )))
                }
                _ => stream,
            }
        }
    };
    Ok(stream)
}

fn test(cmd: &Command, a: &TestArgs) -> Result<(), CliError> {
    let (stream, resolved) = match (&a.input, a.map_args()) {
        (Some(path), _) => (read_bits(path, a.format, a.bits)?, json!({ "input": path })),
        (None, Some(map)) => {
            let kind = map_kind(&map)?;
            let rule = PartitionRule::new(a.threshold)?;
            let cfg = orbit_config(&kind, &map, &a.orbit, a.count);
            let (stream, _) = orbit_bits(&kind, &cfg, &rule)?;
            (stream, json!({ "kind": kind, "orbit": cfg, "rule": rule }))
        }
        (None, None) => return Err(CliError::Usage("test needs --input or --map".into())),
    };
    if stream.len() < SUITE_MIN_BITS {
        return Err(CliError::Usage(format!(
            "test battery needs at least {SUITE_MIN_BITS} bits, got {}",
            stream.len()
        )));
    }
    let report = run_suite(&stream, a.alpha)?;
    let markov = estimate_markov(&stream)?;

    let value = json!({
        "bits": stream.len(),
        "ones": stream.count_ones(),
        "alpha": report.alpha,
        "passed": report.passed(),
        "entries": report.entries,
        "markov": markov,
    });
    if a.json {
        println!("{value}");
    } else {
        print!("{}", test_table(&report, &markov, stream.len()));
    }
    if let Some(out) = &a.out {
        write_file(out, format!("{value}\n").as_bytes())?;
        finish(RunManifest::new(cmd, a.orbit.seed, resolved), &[out])?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::SuiteFailed)
    }
}

fn test_table(
    report: &modtent::trng::TestReport,
    markov: &modtent::trng::MarkovEstimate,
    n: usize,
) -> String {
    use modtent::trng::Outcome;
    let mut out = String::new();
    let _ = writeln!(out, "bits: {n}  alpha: {}", report.alpha);
    let _ = writeln!(
        out,
        "{:<14} {:>14} {:>12}  verdict",
        "test", "statistic", "p-value"
    );
    for e in &report.entries {
        let verdict = match &e.outcome {
            Outcome::Pass => "pass".to_string(),
            Outcome::Fail => "FAIL".to_string(),
            Outcome::Skipped(why) => format!("skipped ({why})"),
            Outcome::Error(why) => format!("ERROR ({why})"),
        };
        let _ = writeln!(
            out,
            "{:<14} {:>14.6} {:>12.6}  {verdict}",
            e.name, e.statistic, e.p_value
        );
    }
    let show = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.6}"));
    let _ = writeln!(
        out,
        "markov p(1|1) = {}  q(0|0) = {}",
        show(markov.p),
        show(markov.q)
    );
    let _ = writeln!(
        out,
        "overall: {}",
        if report.passed() { "PASS" } else { "FAIL" }
    );
    out
}

fn confine(cmd: &Command, a: &ConfineArgs) -> Result<(), CliError> {
    let kind = a.map.kind().map_err(CliError::Usage)?;
    let cfg = ConfinementConfig {
        trials: a.trials,
        steps_per_trial: a.steps,
        dither: a.dither,
        seed: a.seed,
    };
    let report = confinement_probe(&kind, &cfg)?;
    let value = json!({
        "trials": report.trials,
        "escapes": report.escapes,
        "escape_rate": report.escape_rate(),
        "median_escape_step": report.median_escape_step(),
        "max_excursion": report.max_excursion,
    });
    if a.json {
        println!("{value}");
    } else {
        let median = report
            .median_escape_step()
            .map_or("n/a".to_string(), |s| s.to_string());
        println!(
            "trials={} escapes={} escape_rate={} median_escape_step={median} max_excursion={}",
            report.trials,
            report.escapes,
            fmt_f64(report.escape_rate()),
            fmt_f64(report.max_excursion)
        );
    }
    if let Some(out) = &a.out {
        write_file(out, format!("{value}\n").as_bytes())?;
        finish(
            RunManifest::new(cmd, a.seed, json!({ "kind": kind, "confinement": cfg })),
            &[out],
        )?;
    }
    Ok(())
}

fn replay(a: &ReplayArgs) -> Result<(), CliError> {
    let manifest = RunManifest::read(&a.manifest)?;
    if let Command::Replay(_) = manifest.params {
        return Err(CliError::Usage("manifest records a replay".into()));
    }
    if manifest.version != env!("CARGO_PKG_VERSION") {
        eprintln!(
            "warning: manifest written by version {}, replaying with {}",
            manifest.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    run(&manifest.params)
}
