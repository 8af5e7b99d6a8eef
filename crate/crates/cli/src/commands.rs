use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use lierestrict::alcove::{
    affine_relation, bss_cell_contains, classify_bss_t, default_c, facet_chart, sample_alcove, sample_regular_alcove,
    BssLabel,
};
use lierestrict::character::{
    alternating_sum, char_mu, char_nrho, decomposition_residual, weyl_denominator, Weight, WeightOrbit,
};
use lierestrict::linalg;
use lierestrict::norms::{
    invariant_dimensions, lp_norm, lp_norm_weighted, predicted_exponent, scan_exponent, Bound, NormMode, NormValue,
    Prediction, QuadratureSpec,
};
use lierestrict::peeling::{
    critical_exponents, next_permutation, optimal_peeling, peeling_profile, verify_peeling_inequality,
    CriticalExponents,
};
use lierestrict::rootsys::{weyl_group, weyl_order};
use lierestrict::{build_root_system, Family, NodeSet, RootSystem, SubsystemTable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{list, num, Report};

const FULL_TABLE_MAX_RANK: usize = 4;
const VERIFY_SYSTEMS: [(Family, usize); 5] = [
    (Family::A, 1),
    (Family::A, 2),
    (Family::B, 2),
    (Family::C, 3),
    (Family::G, 2),
];
const IDENTITY_TOL: f64 = 1e-9;
const IDENTITY_POINTS: usize = 100;
const DECOMPOSITION_POINTS: usize = 20;
const REGULAR_MARGIN: f64 = 1e-2;
const ORTHO_N: [u32; 2] = [4, 8];
const ORTHO_TOL: f64 = 1e-3;
const ORTHO_Q_RES: usize = 32;
const PARTITION_POINTS: usize = 10_000;
const PARTITION_N: f64 = 32.0;
const PARTITION_ENUM_MAX_RANK: usize = 4;

fn explicit_systems(cfg: &RunConfig) -> Result<Vec<RootSystem>, CliError> {
    if cfg.systems.is_empty() {
        return Err(CliError::Usage(
            "give --family and --rank, or a systems list in --config".into(),
        ));
    }
    cfg.systems.iter().map(|&(f, r)| Ok(build_root_system(f, r)?)).collect()
}

fn one_or_many(items: Vec<Value>) -> Value {
    if items.len() == 1 {
        items.into_iter().next().unwrap()
    } else {
        Value::Array(items)
    }
}

pub fn roots(cfg: &RunConfig) -> Result<Report, CliError> {
    let systems = explicit_systems(cfg)?;
    let mut items = Vec::new();
    let mut rows = Vec::new();
    for rs in &systems {
        let s = rs.to_serial();
        rows.push(vec![
            s.family.clone(),
            s.rank.to_string(),
            s.ambient_dim.to_string(),
            s.group_dim.to_string(),
            s.num_roots.to_string(),
            s.num_positive_roots.to_string(),
            list(&s.marks),
            list(&s.lowest_root),
        ]);
        items.push(serde_json::to_value(&s).map_err(|e| CliError::Internal(e.to_string()))?);
    }
    Ok(Report::new(
        one_or_many(items),
        &[
            "family",
            "rank",
            "ambient_dim",
            "group_dim",
            "num_roots",
            "num_positive_roots",
            "marks",
            "lowest_root",
        ],
        rows,
    ))
}

pub fn peel(cfg: &RunConfig, full_table: bool) -> Result<Report, CliError> {
    let systems = explicit_systems(cfg)?;
    if full_table {
        let [rs] = systems.as_slice() else {
            return Err(CliError::Usage("--full-table takes a single system".into()));
        };
        if rs.rank > FULL_TABLE_MAX_RANK {
            return Err(CliError::Usage(format!(
                "--full-table is limited to rank at most {FULL_TABLE_MAX_RANK}"
            )));
        }
        return peel_table(rs);
    }
    let mut items = Vec::new();
    let mut rows = Vec::new();
    for rs in &systems {
        let table = SubsystemTable::new(rs);
        let opt = optimal_peeling(rs, &table)?;
        let check = verify_peeling_inequality(rs, &table, &opt.perm)?;
        rows.push(vec![
            rs.family.letter().to_string(),
            rs.rank.to_string(),
            list(&opt.q),
            list(&opt.perm),
            check.passed().to_string(),
            check.permutations_checked.to_string(),
        ]);
        items.push(json!({
            "family": rs.family.letter().to_string(),
            "rank": rs.rank,
            "q_opt": opt.q,
            "perm_opt": opt.perm,
            "n_opt": opt.n,
            "inequality_verified": check.passed(),
            "permutations_checked": check.permutations_checked,
        }));
    }
    Ok(Report::new(
        one_or_many(items),
        &[
            "family",
            "rank",
            "q_opt",
            "perm_opt",
            "inequality_verified",
            "permutations_checked",
        ],
        rows,
    ))
}

fn peel_table(rs: &RootSystem) -> Result<Report, CliError> {
    let table = SubsystemTable::new(rs);
    let mut perm: Vec<usize> = (0..=rs.rank).collect();
    let mut items = Vec::new();
    let mut rows = Vec::new();
    loop {
        let prof = peeling_profile(rs, &table, &perm)?;
        rows.push(vec![list(&prof.perm), list(&prof.n), list(&prof.q)]);
        items.push(json!({ "perm": prof.perm, "n": prof.n, "q": prof.q }));
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(Report::new(
        json!({ "family": rs.family.letter().to_string(), "rank": rs.rank, "profiles": items }),
        &["perm", "n", "q"],
        rows,
    ))
}

pub fn exponents(cfg: &RunConfig) -> Result<Report, CliError> {
    let systems = explicit_systems(cfg)?;
    let mut items = Vec::new();
    let mut rows = Vec::new();
    for rs in &systems {
        let ce = critical_exponents(rs)?;
        for k in 1..=rs.rank {
            rows.push(vec![
                rs.family.letter().to_string(),
                rs.rank.to_string(),
                k.to_string(),
                ce.k_over_p[k].to_string(),
                linalg::format_q(&ce.p[k]),
            ]);
        }
        let mut v = serde_json::to_value(&ce).map_err(|e| CliError::Internal(e.to_string()))?;
        v["family"] = json!(rs.family.letter().to_string());
        v["rank"] = json!(rs.rank);
        items.push(v);
    }
    Ok(Report::new(
        one_or_many(items),
        &["family", "rank", "k", "k_over_p", "p_k"],
        rows,
    ))
}

/// Reads rows of `t_0..t_r`, or `t_1..t_r` with `t_0` filled in from the affine relation.
fn read_points(rs: &RootSystem, path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let reader: Box<dyn std::io::Read> = if path.as_os_str() == "-" {
        Box::new(std::io::stdin())
    } else {
        Box::new(
            std::fs::File::open(path)
                .map_err(|e| CliError::Usage(format!("cannot read points {}: {e}", path.display())))?,
        )
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(reader);
    let mut points = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(format!("points: {e}")))?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let Ok(vals) = parsed else {
            if line == 0 {
                continue;
            }
            return Err(CliError::Usage(format!("points row {}: non-numeric entry", line + 1)));
        };
        if vals.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Usage(format!("points row {}: non-finite entry", line + 1)));
        }
        let t = if vals.len() == rs.rank + 1 {
            let rel = affine_relation(rs, &vals);
            if (rel - 1.0).abs() > 1e-9 {
                return Err(CliError::Usage(format!(
                    "points row {}: t-coordinates violate the affine relation (sum is {rel})",
                    line + 1
                )));
            }
            vals
        } else if vals.len() == rs.rank {
            let mut t = vec![0.0];
            t.extend(vals);
            t[0] = 1.0 - affine_relation(rs, &t);
            t
        } else {
            return Err(CliError::Usage(format!(
                "points row {}: expected {} or {} coordinates, got {}",
                line + 1,
                rs.rank,
                rs.rank + 1,
                vals.len()
            )));
        };
        points.push(t);
    }
    if points.is_empty() {
        return Err(CliError::Usage("no points given".into()));
    }
    Ok(points)
}

fn t_header(rank: usize) -> Vec<String> {
    (0..=rank).map(|j| format!("t{j}")).collect()
}

fn with_header(mut report: Report, rank: usize, tail: &[&str]) -> Report {
    let mut header = t_header(rank);
    header.extend(tail.iter().map(|s| s.to_string()));
    report.header = header;
    report
}

pub fn char_eval(cfg: &RunConfig, n: Option<u32>, mu: Option<&str>, points: &Path) -> Result<Report, CliError> {
    let rs = cfg.single_system()?;
    let weight = match (n, mu) {
        (Some(0), _) => return Err(CliError::Usage("N must be positive".into())),
        (Some(_), None) => None,
        (None, Some(text)) => {
            let coords: Vec<i64> = text
                .split(',')
                .map(|s| s.trim().parse::<i64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Usage(format!("bad weight coordinates '{text}'")))?;
            Some((coords.clone(), Weight::from_fundamental(&rs, &coords)?))
        }
        _ => return Err(CliError::Usage("give exactly one of --n and --mu".into())),
    };
    let pts = read_points(&rs, points)?;
    let group = match &weight {
        Some(_) => Some(weyl_group(&rs, cfg.weyl_cap)?),
        None => None,
    };
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for t in &pts {
        let h = rs.point_from_simple_t(&t[1..]);
        let v = match (&weight, &group) {
            (Some((_, w)), Some(g)) => char_mu(&rs, g, &h, w)?,
            _ => char_nrho(&rs, &h, n.unwrap_or(1)),
        };
        let mut row: Vec<String> = t.iter().map(|&x| num(x)).collect();
        row.extend([num(v.value.re), num(v.value.im), v.regime.as_str().to_string()]);
        rows.push(row);
        items.push(json!({ "t": t, "re": v.value.re, "im": v.value.im, "regime": v.regime.as_str() }));
    }
    let json = json!({
        "family": rs.family.letter().to_string(),
        "rank": rs.rank,
        "N": n,
        "mu": weight.map(|(c, _)| c),
        "values": items,
    });
    Ok(with_header(
        Report::new(json, &[], rows),
        rs.rank,
        &["re", "im", "regime"],
    ))
}

pub fn alcove_classify(cfg: &RunConfig, n: f64, points: &Path) -> Result<Report, CliError> {
    let rs = cfg.single_system()?;
    let c = cfg.c.unwrap_or_else(|| default_c(&rs));
    classify_bss_t(&rs, &vec![0.0; rs.rank + 1], n, c)?;
    let pts = read_points(&rs, points)?;
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for t in &pts {
        let (k, j) = match classify_bss_t(&rs, t, n, c)? {
            BssLabel::Cell { k, j } => (k.to_string(), j.to_string()),
            BssLabel::Outside => ("OUTSIDE".to_string(), "OUTSIDE".to_string()),
        };
        let mut row: Vec<String> = t.iter().map(|&x| num(x)).collect();
        row.extend([k.clone(), j.clone()]);
        rows.push(row);
        items.push(json!({ "t": t, "K": k, "J": j }));
    }
    let json = json!({ "family": rs.family.letter().to_string(), "rank": rs.rank, "N": n, "c": c, "labels": items });
    Ok(with_header(Report::new(json, &[], rows), rs.rank, &["K", "J"]))
}

pub fn alcove_chart(cfg: &RunConfig, nodes: &str) -> Result<Report, CliError> {
    let rs = cfg.single_system()?;
    let nodes = NodeSet::parse(nodes)?;
    let chart = facet_chart(&rs, nodes)?;
    let json = serde_json::to_value(&chart).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut header = vec!["coordinate".to_string(), "offset".to_string()];
    header.extend(chart.free.iter().map(|f| format!("d_t{f}")));
    let rows = (0..chart.offset.len())
        .map(|i| {
            let mut row = vec![i.to_string(), linalg::format_q(&chart.offset_exact[i])];
            row.extend(chart.directions_exact.iter().map(|d| linalg::format_q(&d[i])));
            row
        })
        .collect();
    let mut report = Report::new(json, &[], rows);
    report.header = header;
    Ok(report)
}

struct NormJob {
    rs: RootSystem,
    mode: NormMode,
    nodes: NodeSet,
    p: f64,
    quad: QuadratureSpec,
    prediction: Option<Prediction>,
    bound: Option<Bound>,
}

fn norm_job(cfg: &RunConfig) -> Result<NormJob, CliError> {
    let rs = cfg.single_system()?;
    let sec = &cfg.norm;
    let nodes = NodeSet::parse(sec.nodes.as_deref().unwrap_or(""))?;
    rs.check_proper(nodes)?;
    let p = sec.p.ok_or_else(|| CliError::Usage("--p is required".into()))?;
    if !(p > 0.0) {
        return Err(CliError::Usage(format!("p must be positive, got {p}")));
    }
    let quad = cfg.quadrature()?;
    let ce = critical_exponents(&rs)?;
    let mode = match sec.mode.as_deref().unwrap_or("facet") {
        "facet" => NormMode::Facet,
        "weighted" => NormMode::Weighted,
        "region" => {
            let perm0 = match &sec.perm {
                Some(perm) => perm.clone(),
                None => optimal_peeling(&rs, &SubsystemTable::new(&rs))?.perm,
            };
            NormMode::Region {
                perm0,
                c: cfg.c.unwrap_or_else(|| default_c(&rs)),
            }
        }
        other => return Err(CliError::Usage(format!("unknown mode '{other}'"))),
    };
    let bound = match &sec.bound {
        Some(b) => Some(b.parse::<Bound>()?),
        None => match mode {
            NormMode::Weighted if p == 2.0 => Some(Bound::InvariantL2),
            NormMode::Weighted if p > 2.0 => Some(Bound::Invariant),
            NormMode::Weighted => None,
            _ => Some(Bound::Restriction),
        },
    };
    let prediction = bound.and_then(|b| predict(&rs, &ce, b, nodes, p).ok());
    Ok(NormJob {
        rs,
        mode,
        nodes,
        p,
        quad,
        prediction,
        bound,
    })
}

fn predict(
    rs: &RootSystem,
    ce: &CriticalExponents,
    bound: Bound,
    nodes: NodeSet,
    p: f64,
) -> Result<Prediction, CliError> {
    let (k, n) = invariant_dimensions(rs, nodes)?;
    Ok(predicted_exponent(rs, ce, bound, k, Some(n), p)?)
}

impl NormJob {
    fn eval(&self, n: u32) -> lierestrict::Result<NormValue> {
        lp_norm(&self.rs, &self.mode, self.nodes, self.p, n, &self.quad)
    }

    fn row(&self, n: u32, v: &NormValue) -> Vec<String> {
        vec![
            n.to_string(),
            num(self.p),
            self.rs.family.letter().to_string(),
            self.rs.rank.to_string(),
            self.nodes.to_string(),
            self.mode.name().to_string(),
            num(v.value),
            num(v.err_est),
            self.prediction.map_or(String::new(), |pr| num(pr.exponent)),
        ]
    }

    fn meta(&self) -> Value {
        json!({
            "family": self.rs.family.letter().to_string(),
            "rank": self.rs.rank,
            "J": self.nodes.to_string(),
            "mode": self.mode.name(),
            "p": self.p,
            "bound": self.bound.map(Bound::name),
            "predicted_exponent": self.prediction.map(|pr| pr.exponent),
            "log_power": self.prediction.map(|pr| pr.log_power),
            "quadrature": self.quad,
        })
    }
}

const NORM_HEADER: [&str; 9] = [
    "N",
    "p",
    "family",
    "rank",
    "J",
    "mode",
    "value",
    "err_est",
    "predicted_exponent",
];

pub fn norm(cfg: &RunConfig) -> Result<Report, CliError> {
    let job = norm_job(cfg)?;
    let n_values = match (cfg.norm.n, &cfg.norm.n_values) {
        (Some(n), _) => vec![n],
        (None, Some(list)) if !list.is_empty() => list.clone(),
        _ => return Err(CliError::Usage("--n or --n-values is required".into())),
    };
    if n_values.contains(&0) {
        return Err(CliError::Usage("N must be positive".into()));
    }
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for &n in &n_values {
        let v = job.eval(n)?;
        rows.push(job.row(n, &v));
        items.push(json!({ "N": n, "value": v.value, "err_est": v.err_est, "nodes": v.nodes }));
    }
    let mut json = job.meta();
    if let [item] = items.as_slice() {
        for key in ["N", "value", "err_est", "nodes"] {
            json[key] = item[key].clone();
        }
    } else {
        json["values"] = Value::Array(items);
    }
    Ok(Report::new(json, &NORM_HEADER, rows))
}

pub fn scan(cfg: &RunConfig) -> Result<Report, CliError> {
    let job = norm_job(cfg)?;
    let n_values = cfg
        .norm
        .n_values
        .clone()
        .ok_or_else(|| CliError::Usage("--n-values is required".into()))?;
    let prediction = job.prediction.ok_or_else(|| {
        CliError::Usage(format!(
            "no predicted exponent for mode {} at p = {}; choose a --bound",
            job.mode.name(),
            job.p
        ))
    })?;
    let log_correct = cfg.norm.log_correct.unwrap_or(false);
    let values = Mutex::new(BTreeMap::new());
    let result = scan_exponent(&n_values, prediction, log_correct, |n| {
        let v = job.eval(n)?;
        values.lock().unwrap().insert(n, v);
        Ok(v.value)
    })?;
    let values = values.into_inner().unwrap();
    let slope = num(result.fitted_slope);
    let rows = n_values
        .iter()
        .map(|n| {
            let mut row = job.row(*n, &values[n]);
            row.push(slope.clone());
            row
        })
        .collect();
    let mut json = job.meta();
    json["scan"] = serde_json::to_value(&result).map_err(|e| CliError::Internal(e.to_string()))?;
    json["err_est"] = json!(n_values.iter().map(|n| values[n].err_est).collect::<Vec<_>>());
    let mut header = NORM_HEADER.to_vec();
    header.push("fitted_slope");
    Ok(Report::new(json, &header, rows))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

struct Check {
    system: String,
    name: &'static str,
    status: Status,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> (Status, String) {
    (if ok { Status::Pass } else { Status::Fail }, detail)
}

fn check_marks(rs: &RootSystem) -> (Status, String) {
    let mut sum = vec![linalg::Q::from_integer(0); rs.ambient_dim];
    for (i, &m) in rs.marks.iter().enumerate() {
        sum = linalg::add(&sum, &linalg::scale(&rs.simple_roots[i], linalg::Q::from_integer(m)));
    }
    let highest: Vec<_> = rs.lowest_root.iter().map(|x| -*x).collect();
    let positive = rs.marks.iter().all(|&m| m > 0);
    outcome(sum == highest && positive, format!("marks {:?}", rs.marks))
}

fn check_peeling(rs: &RootSystem) -> Result<(Status, String), CliError> {
    let table = SubsystemTable::new(rs);
    let opt = optimal_peeling(rs, &table)?;
    let report = verify_peeling_inequality(rs, &table, &opt.perm)?;
    let q = &opt.q;
    let decreasing = q[0] == 0 && q[rs.rank] == 1 && q[1..].windows(2).all(|w| w[0] > w[1]);
    let ce = critical_exponents(rs);
    Ok(outcome(
        report.passed() && decreasing && ce.is_ok(),
        format!("q {:?}, {} permutations", q, report.permutations_checked),
    ))
}

fn check_identities(
    rs: &RootSystem,
    cfg: &RunConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(&'static str, Status, String)>, CliError> {
    let order = weyl_order(rs.family, rs.rank);
    if order > cfg.weyl_cap as u128 {
        let why = format!("|W| = {order} exceeds the cap {}", cfg.weyl_cap);
        return Ok(vec![
            ("denominator", Status::Skipped, why.clone()),
            ("decomposition", Status::Skipped, why),
        ]);
    }
    let w = weyl_group(rs, cfg.weyl_cap)?;
    let rho = WeightOrbit::new(&w, &rs.weyl_vector);
    let mut worst_den: f64 = 0.0;
    for _ in 0..IDENTITY_POINTS {
        let p = sample_regular_alcove(rs, rng, REGULAR_MARGIN);
        let prod = weyl_denominator(rs, &p.h);
        worst_den = worst_den.max((prod - alternating_sum(&rho, &p.h)).norm() / prod.norm());
    }
    let mu = Weight::n_rho(rs, 3);
    let masks = (1u32 << (rs.rank + 1)) - 2;
    let mut worst_dec: f64 = 0.0;
    for i in 0..DECOMPOSITION_POINTS {
        let p = sample_regular_alcove(rs, rng, REGULAR_MARGIN);
        let j = NodeSet(1 + (i as u32) % masks);
        worst_dec = worst_dec.max(decomposition_residual(rs, &w, &p.h, &mu, j, cfg.weyl_cap)?);
    }
    let (s1, d1) = outcome(worst_den < IDENTITY_TOL, format!("max residual {worst_den:.2e}"));
    let (s2, d2) = outcome(worst_dec < IDENTITY_TOL, format!("max residual {worst_dec:.2e}"));
    Ok(vec![("denominator", s1, d1), ("decomposition", s2, d2)])
}

fn check_orthonormality(rs: &RootSystem, cfg: &RunConfig) -> Result<(Status, String), CliError> {
    if rs.rank > 2 {
        return Ok((
            Status::Skipped,
            format!("rank {} alcove quadrature is not run here", rs.rank),
        ));
    }
    let order = weyl_order(rs.family, rs.rank) as f64;
    let mut quad = QuadratureSpec::with_q_res(cfg.q_res.max(ORTHO_Q_RES));
    quad.node_budget = cfg.node_budget;
    let mut worst: f64 = 0.0;
    for n in ORTHO_N {
        let v = lp_norm_weighted(rs, NodeSet::EMPTY, 2.0, n, &quad)?;
        worst = worst.max((v.value * v.value / order - 1.0).abs());
    }
    Ok(outcome(worst < ORTHO_TOL, format!("max deviation {worst:.2e}")))
}

fn check_partition(rs: &RootSystem, c: f64, rng: &mut ChaCha8Rng) -> Result<(Status, String), CliError> {
    let n = PARTITION_N.max((2.0 / c).floor() + 1.0);
    let nodes = rs.rank + 1;
    let pairs: Vec<(NodeSet, NodeSet)> = if rs.rank <= PARTITION_ENUM_MAX_RANK {
        (0u32..(1 << nodes))
            .flat_map(|k| {
                (0u32..(1 << nodes))
                    .filter(move |j| j & !k == 0)
                    .map(move |j| (NodeSet(k), NodeSet(j)))
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut bad = 0;
    for _ in 0..PARTITION_POINTS {
        let p = sample_alcove(rs, rng);
        match classify_bss_t(rs, &p.t, n, c)? {
            BssLabel::Cell { k, j } => {
                let own = bss_cell_contains(&p.t, k, j, n, c);
                let unique = pairs.is_empty()
                    || pairs
                        .iter()
                        .filter(|(k2, j2)| bss_cell_contains(&p.t, *k2, *j2, n, c))
                        .count()
                        == 1;
                if !(own && unique) {
                    bad += 1;
                }
            }
            BssLabel::Outside => bad += 1,
        }
    }
    Ok(outcome(
        bad == 0,
        format!("{bad} of {PARTITION_POINTS} points misplaced at N = {n}, c = {c}"),
    ))
}

pub fn verify(cfg: &RunConfig, corrupt_marks: bool) -> Result<(Report, bool), CliError> {
    let systems: Vec<(Family, usize)> = if cfg.explicit_system {
        cfg.systems.clone()
    } else {
        VERIFY_SYSTEMS.to_vec()
    };
    let mut checks = Vec::new();
    for (f, r) in systems {
        let mut rs = build_root_system(f, r)?;
        if corrupt_marks {
            rs.marks[0] += 1;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let c = cfg.c.unwrap_or_else(|| default_c(&rs));
        let mut results: Vec<(&'static str, Status, String)> = Vec::new();
        let (s, d) = check_marks(&rs);
        results.push(("marks", s, d));
        let (s, d) = check_peeling(&rs)?;
        results.push(("peeling", s, d));
        results.extend(check_identities(&rs, cfg, &mut rng)?);
        let (s, d) = check_orthonormality(&rs, cfg)?;
        results.push(("orthonormality", s, d));
        for (name, cc) in [("partition", c), ("partition_half_c", 0.5 * c)] {
            let (s, d) = match check_partition(&rs, cc, &mut rng) {
                Ok(x) => x,
                Err(CliError::Usage(m)) => (Status::Fail, m),
                Err(e) => return Err(e),
            };
            results.push((name, s, d));
        }
        for (name, status, detail) in results {
            checks.push(Check {
                system: rs.name(),
                name,
                status,
                detail,
            });
        }
    }
    for c in checks.iter().filter(|c| c.status == Status::Skipped) {
        eprintln!("warning: {} {} skipped: {}", c.system, c.name, c.detail);
    }
    let passed = checks.iter().all(|c| c.status != Status::Fail);
    let json = json!({
        "passed": passed,
        "checks": checks
            .iter()
            .map(|c| json!({ "system": c.system, "check": c.name, "status": c.status.as_str(), "detail": c.detail }))
            .collect::<Vec<_>>(),
    });
    let rows = checks
        .iter()
        .map(|c| {
            vec![
                c.system.clone(),
                c.name.to_string(),
                c.status.as_str().to_string(),
                c.detail.clone(),
            ]
        })
        .collect();
    Ok((
        Report::new(json, &["system", "check", "status", "detail"], rows),
        passed,
    ))
}
