use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use roadprof::metrics::{
    distance_stats, kappa_grid, performance_profile, relative_proximity_curves, write_distance_csv, write_profile_csv,
    write_proximity_csv, ProfileCurve, Summary,
};
use roadprof::probgen::{make_batch, BatchParams};
use roadprof::runner::{run, sort_records, RunOptions};
use roadprof::verify::{run_all, Faults};
use roadprof::{exec, AlgorithmId, Exec, FeasibilityProblem, RunRecord};
use serde::{Deserialize, Serialize};

use crate::config::HarnessConfig;
use crate::UsageError;

/// Pairs solved between two flushes of the record store.
const CHUNK: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub file: String,
    pub seed: u64,
    pub n: usize,
    pub certified_feasible: bool,
}

/// Everything needed to regenerate a batch. The timestamp is the only field
/// that changes between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub master_seed: u64,
    pub count: usize,
    pub nonconvex: bool,
    pub params: BatchParams,
    pub generated_unix: u64,
    pub problems: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let s = fs::read_to_string(path)
            .with_context(|| format!("reading {} (run `roadprof generate` first)", path.display()))?;
        serde_json::from_str(&s).with_context(|| format!("parsing {}", path.display()))
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {}", tmp.display()))
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn generate(cfg: &HarnessConfig, from_manifest: Option<&Path>) -> anyhow::Result<()> {
    let (seed, count, nonconvex, params) = match from_manifest {
        Some(path) => {
            let m = Manifest::load(path)?;
            (m.master_seed, m.count, m.nonconvex, m.params)
        }
        None => (cfg.seed, cfg.count, cfg.nonconvex, cfg.batch_params()),
    };
    if count == 0 {
        return Err(UsageError("count must be at least 1".into()).into());
    }
    let problems = exec::with_threads(cfg.jobs, || make_batch(count, &params, seed, Exec::Parallel))
        .map_err(|e| UsageError(e.to_string()))?;
    let dir = cfg.problems_dir();
    create_dir(&dir)?;
    let mut entries = Vec::with_capacity(problems.len());
    for p in &problems {
        let file = format!("{}.json", p.id);
        p.save(&dir.join(&file))?;
        entries.push(ManifestEntry {
            id: p.id.clone(),
            file,
            seed: p.meta.seed.unwrap_or_default(),
            n: p.n(),
            certified_feasible: p.meta.certified_feasible.unwrap_or(false),
        });
    }
    let manifest = Manifest {
        master_seed: seed,
        count,
        nonconvex,
        params,
        generated_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        problems: entries,
    };
    let uncertified = manifest.problems.iter().filter(|e| !e.certified_feasible).count();
    write_atomic(
        &dir.join("manifest.json"),
        (serde_json::to_string_pretty(&manifest)? + "\n").as_bytes(),
    )?;
    println!(
        "generated {count} problems (seed {seed}, {}) in {}",
        if nonconvex { "nonconvex" } else { "convex" },
        dir.display()
    );
    if uncertified > 0 {
        println!("{uncertified} problems may have an empty intersection");
    }
    Ok(())
}

fn load_problems(cfg: &HarnessConfig) -> anyhow::Result<Vec<FeasibilityProblem>> {
    let dir = cfg.problems_dir();
    let m = Manifest::load(&dir.join("manifest.json"))?;
    m.problems
        .iter()
        .map(|e| {
            let path = dir.join(&e.file);
            FeasibilityProblem::load(&path).with_context(|| format!("loading {}", path.display()))
        })
        .collect()
}

/// Reads a JSON-lines store. A torn final line (interrupted append) is
/// dropped; damage anywhere else is an error.
pub fn read_records(path: &Path) -> anyhow::Result<Vec<RunRecord>> {
    let f = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e).with_context(|| format!("opening {}", path.display())),
    };
    let lines: Vec<String> = BufReader::new(f)
        .lines()
        .collect::<std::io::Result<_>>()
        .with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(e) if i + 1 == lines.len() => log::warn!("dropping torn last line of {}: {e}", path.display()),
            Err(e) => bail!("{}:{}: {e}", path.display(), i + 1),
        }
    }
    Ok(out)
}

fn write_records(path: &Path, records: &[RunRecord]) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r)?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

pub fn run_cmd(cfg: &HarnessConfig) -> anyhow::Result<()> {
    let algs = cfg.algorithm_ids()?;
    let opts = RunOptions {
        rule: cfg.stop_rule()?,
        perturbation: cfg.perturbation,
        exec: Exec::Sequential,
    };
    let problems = load_problems(cfg)?;
    let store = cfg.runs_file();
    create_dir(store.parent().expect("store path has a parent"))?;

    let mut records = read_records(&store)?;
    let done: BTreeSet<(String, String)> = records
        .iter()
        .map(|r| (r.algorithm.clone(), r.problem.clone()))
        .collect();
    let pending: Vec<(AlgorithmId, &FeasibilityProblem)> = algs
        .iter()
        .flat_map(|&a| problems.iter().map(move |p| (a, p)))
        .filter(|(a, p)| !done.contains(&(a.name().to_string(), p.id.clone())))
        .collect();
    let resumed = algs.len() * problems.len() - pending.len();
    if resumed > 0 {
        println!("resuming: {resumed} runs already recorded");
    }

    let mut log = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&store)
        .with_context(|| format!("opening {}", store.display()))?;
    exec::with_threads(cfg.jobs, || -> anyhow::Result<()> {
        for chunk in pending.chunks(CHUNK) {
            let fresh = Exec::Parallel.map(chunk, |(a, p)| run(*a, p, &opts));
            let mut w = BufWriter::new(&mut log);
            for r in &fresh {
                serde_json::to_writer(&mut w, r)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
            records.extend(fresh);
        }
        Ok(())
    })?;

    sort_records(&mut records);
    records.dedup_by(|a, b| a.key() == b.key());
    write_records(&store, &records)?;
    let wanted: BTreeSet<&str> = algs.iter().map(|a| a.name()).collect();
    let ours: Vec<&RunRecord> = records
        .iter()
        .filter(|r| wanted.contains(r.algorithm.as_str()))
        .collect();
    let converged = ours.iter().filter(|r| r.converged).count();
    println!(
        "{} runs ({} new), {converged} converged; records in {}",
        ours.len(),
        pending.len(),
        store.display()
    );
    Ok(())
}

fn check_profiles(curves: &[ProfileCurve]) -> anyhow::Result<()> {
    for c in curves {
        for w in c.points.windows(2) {
            if w[1].1 < w[0].1 {
                bail!("profile of {} decreases at kappa {}", c.algorithm, w[1].0);
            }
        }
        if let Some(&(k, r)) = c.points.iter().find(|(_, r)| !(0.0..=1.0).contains(r)) {
            bail!("profile of {} leaves [0, 1] at kappa {k}: {r}", c.algorithm);
        }
    }
    Ok(())
}

fn rho_at(c: &ProfileCurve, first: bool) -> f64 {
    let p = if first { c.points.first() } else { c.points.last() };
    p.map_or(0.0, |p| p.1)
}

/// Algorithms attaining the best score, in name order.
fn leaders<'a>(scores: impl IntoIterator<Item = (&'a str, f64)>, larger_is_better: bool) -> String {
    let scores: Vec<(&str, f64)> = scores.into_iter().collect();
    let best = scores.iter().map(|s| s.1).fold(None, |acc: Option<f64>, v| match acc {
        None => Some(v),
        Some(a) if larger_is_better => Some(a.max(v)),
        Some(a) => Some(a.min(v)),
    });
    let Some(best) = best else { return "-".into() };
    scores
        .iter()
        .filter(|s| (s.1 - best).abs() <= 1e-12)
        .map(|s| s.0)
        .collect::<Vec<_>>()
        .join(", ")
}

fn summary_text(
    cfg: &HarnessConfig,
    records: &[RunRecord],
    curves: &[ProfileCurve],
    stats: &BTreeMap<String, Summary>,
) -> String {
    let mut s = String::new();
    let problems: BTreeSet<&str> = records.iter().map(|r| r.problem.as_str()).collect();
    s += &format!(
        "mode {}: {} algorithms, {} problems, eps {}, k_max {}\n\n",
        cfg.mode.dir_name(),
        curves.len(),
        problems.len(),
        cfg.stop.eps,
        cfg.stop.k_max
    );
    s += &format!(
        "fastest (rho at kappa 0): {}\n",
        leaders(curves.iter().map(|c| (c.algorithm.as_str(), rho_at(c, true))), true)
    );
    s += &format!(
        "most robust (rho at kappa max): {}\n",
        leaders(curves.iter().map(|c| (c.algorithm.as_str(), rho_at(c, false))), true)
    );
    s += &format!(
        "closest to the start (mean Delta): {}\n\n",
        leaders(stats.iter().map(|(a, st)| (a.as_str(), st.mean)), false)
    );
    s += "algorithm  solved  capped  failed  mean-iterations\n";
    let mut by_alg: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_alg.entry(&r.algorithm).or_default().push(r);
    }
    for (a, rs) in &by_alg {
        let solved = rs.iter().filter(|r| r.converged).count();
        let failed = rs
            .iter()
            .filter(|r| matches!(r.status, roadprof::RunStatus::Failed { .. }))
            .count();
        let capped = rs.len() - solved - failed;
        let mean = rs.iter().map(|r| r.iterations as f64).sum::<f64>() / rs.len() as f64;
        s += &format!("{a:<10} {solved:>6}  {capped:>6}  {failed:>6}  {mean:>15.1}\n");
    }
    s += "\nRuns stopped by the iteration cap enter the profiles with k_max iterations\n";
    s += "and take the largest distance any algorithm reached on that problem.\n";
    s
}

pub fn report(cfg: &HarnessConfig) -> anyhow::Result<PathBuf> {
    let store = cfg.runs_file();
    let records = read_records(&store)?;
    if records.is_empty() {
        bail!("no records in {} (run `roadprof run` first)", store.display());
    }
    let anchors: BTreeMap<String, Vec<f64>> = load_problems(cfg)?.into_iter().map(|p| (p.id, p.v)).collect();

    let kappas = kappa_grid(cfg.stop.k_max, cfg.kappa_step);
    let curves = performance_profile(&records, &kappas)
        .with_context(|| format!("records in {} are incomplete; rerun `roadprof run`", store.display()))?;
    check_profiles(&curves)?;
    let longest = records.iter().map(|r| r.d_trace.len()).max().unwrap_or(1);
    let proximity = relative_proximity_curves(&records, longest - 1);
    let stats = distance_stats(&records, &anchors);

    let dir = cfg.report_dir();
    create_dir(&dir)?;
    let open = |name: &str| {
        let p = dir.join(name);
        File::create(&p).with_context(|| format!("creating {}", p.display()))
    };
    write_profile_csv(open("profile.csv")?, &curves)?;
    write_proximity_csv(open("proximity.csv")?, &proximity)?;
    write_distance_csv(open("distances.csv")?, &stats)?;
    let summary = summary_text(cfg, &records, &curves, &stats);
    fs::write(dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    println!("report written to {}", dir.display());
    Ok(dir)
}

/// Runs the built-in fixtures; `Ok(false)` when any check fails.
pub fn verify(fault_shift: f64) -> anyhow::Result<bool> {
    let reports = run_all(Faults {
        projector_shift: fault_shift,
    });
    let mut all = true;
    for r in &reports {
        println!("[{}] {}", if r.passed() { "PASS" } else { "FAIL" }, r.name);
        for c in &r.checks {
            println!(
                "    {} {}: expected {:.6e}, computed {:.6e}, tol {:.1e}",
                if c.passed { "ok  " } else { "FAIL" },
                c.what,
                c.expected,
                c.computed,
                c.tol
            );
        }
        all &= r.passed();
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    println!("{passed} of {} fixtures passed", reports.len());
    Ok(all)
}
