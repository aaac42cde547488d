//! Experiment configs, dispatch, and output rendering.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::amalgam::{intersection_check, pushed_sequences};
use crate::error::{Error, Result};
use crate::freeab::{
    ball_cap_un, compact_witness, in_h, in_un, nondiscrete_witness, norm1, FiberFn, FinVec, SubgroupH,
};
use crate::num::{fmt_rat, parse_fraction, parse_int};
use crate::report::{Verdict, WitnessReport};
use crate::ringseq::{gen_theorem2, obstruction_witnesses, ratio_profile, RatioTarget};
use crate::seq::{IntSeq, SeqPreset};
use crate::topology::{
    diagonal_escape_report, member_nbhd_free, member_nbhd_int, CanonicalNbhd, IntMembership, TailSumQuery,
};
use crate::tracker::{gap_stats, track, Blocking, Epsilon, GrowthFn, TrackedSeq, TrackerSpec};
use crate::zbase::BaseDesc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentId {
    #[serde(rename = "thm1-track")]
    Track,
    #[serde(rename = "thm1-gaps")]
    Gaps,
    #[serde(rename = "thm2-ring")]
    Ring,
    #[serde(rename = "thm3-subgroup")]
    Subgroup,
    #[serde(rename = "thm5-sup")]
    Sup,
    #[serde(rename = "thm6-tau")]
    Tau,
    #[serde(rename = "thm4-amalgam")]
    Amalgam,
    #[serde(rename = "nbhd-member")]
    NbhdMember,
}

impl ExperimentId {
    fn allowed(self) -> &'static [&'static str] {
        match self {
            ExperimentId::Track => &["base", "f", "eps", "N", "level_cap"],
            ExperimentId::Gaps => &["seq", "base", "f", "eps", "N", "level_cap", "blocks"],
            ExperimentId::Ring => &["r", "N", "kmax", "ratio_from", "ratio_to"],
            ExperimentId::Subgroup => &["n0", "count", "fiber"],
            ExperimentId::Sup => &["a", "b", "g", "N"],
            ExperimentId::Tau => &["mode", "n0", "window", "n", "slots", "count"],
            ExperimentId::Amalgam => &["mode", "c", "bound", "a", "N"],
            ExperimentId::NbhdMember => &["seq", "x", "slots", "depth", "terms", "budget"],
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).expect("serializable");
        f.write_str(v.as_str().expect("string tag"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId) -> Self {
        ExperimentConfig {
            experiment,
            params: BTreeMap::new(),
            output: None,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config {
            field: "config".into(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Canonical form: sorted keys, pretty printed.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("serializable");
        serde_json::to_string_pretty(&v).expect("serializable")
    }

    pub fn validate(&self) -> Result<()> {
        let allowed = self.experiment.allowed();
        for key in self.params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config {
                    field: format!("params.{key}"),
                    msg: format!("unknown parameter for {}", self.experiment),
                });
            }
        }
        Ok(())
    }

    /// Values from `other` win.
    pub fn merge(&mut self, other: ExperimentConfig) -> Result<()> {
        if other.experiment != self.experiment {
            return Err(Error::Config {
                field: "experiment".into(),
                msg: format!("config runs {} but the command is {}", other.experiment, self.experiment),
            });
        }
        self.params.extend(other.params);
        if other.output.is_some() {
            self.output = other.output;
        }
        Ok(())
    }
}

struct Params<'a>(&'a BTreeMap<String, Value>);

impl Params<'_> {
    fn err(field: &str, msg: impl Into<String>) -> Error {
        Error::Config {
            field: format!("params.{field}"),
            msg: msg.into(),
        }
    }

    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    fn text(&self, key: &str) -> Result<Option<String>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Number(n)) => Ok(Some(n.to_string())),
            Some(_) => Err(Self::err(key, "expected a string or number")),
        }
    }

    fn req_text(&self, key: &str) -> Result<String> {
        self.text(key)?.ok_or_else(|| Self::err(key, "missing"))
    }

    fn wrap<T>(key: &str, r: Result<T>) -> Result<T> {
        r.map_err(|e| Self::err(key, e.to_string()))
    }

    fn int(&self, key: &str) -> Result<Option<BigInt>> {
        self.text(key)?.map(|t| Self::wrap(key, parse_int(&t))).transpose()
    }

    fn req_int(&self, key: &str) -> Result<BigInt> {
        self.int(key)?.ok_or_else(|| Self::err(key, "missing"))
    }

    fn u64_or(&self, key: &str, default: Option<u64>) -> Result<u64> {
        match self.int(key)? {
            Some(v) => v.to_u64().ok_or_else(|| Self::err(key, "expected a non-negative 64-bit integer")),
            None => default.ok_or_else(|| Self::err(key, "missing")),
        }
    }

    fn parsed<T: std::str::FromStr<Err = Error>>(&self, key: &str) -> Result<Option<T>> {
        self.text(key)?.map(|t| Self::wrap(key, t.parse())).transpose()
    }

    fn req_parsed<T: std::str::FromStr<Err = Error>>(&self, key: &str) -> Result<T> {
        self.parsed(key)?.ok_or_else(|| Self::err(key, "missing"))
    }

    fn base(&self) -> Result<BaseDesc> {
        match self.0.get("base") {
            None => Err(Self::err("base", "missing")),
            Some(Value::String(s)) => Self::wrap("base", s.parse()),
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| Self::err("base", e.to_string())),
        }
    }
}

/// Either a certificate or a plain table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Report(WitnessReport),
    Table { header: Vec<String>, rows: Vec<Vec<String>> },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REFUTED: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Table { .. } => EXIT_OK,
            Outcome::Report(r) => match r.verdict {
                Verdict::Certified => EXIT_OK,
                Verdict::Refuted => EXIT_REFUTED,
                Verdict::Inconclusive => EXIT_INCONCLUSIVE,
            },
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match (self, format) {
            (Outcome::Report(r), Format::Json) => Ok(r.to_json() + "\n"),
            (Outcome::Report(r), Format::Csv) => {
                let mut header: Vec<String> = r.evidence.iter().flat_map(|e| e.keys().cloned()).collect();
                header.sort();
                header.dedup();
                let rows = r
                    .evidence
                    .iter()
                    .map(|e| header.iter().map(|k| e.get(k).cloned().unwrap_or_default()).collect())
                    .collect::<Vec<_>>();
                to_csv(&header, &rows)
            }
            (Outcome::Table { header, rows }, Format::Csv) => to_csv(header, rows),
            (Outcome::Table { header, rows }, Format::Json) => {
                let items: Vec<Value> = rows
                    .iter()
                    .map(|row| {
                        let obj: serde_json::Map<String, Value> = header
                            .iter()
                            .zip(row)
                            .map(|(h, v)| (h.clone(), Value::String(v.clone())))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                Ok(serde_json::to_string_pretty(&Value::Array(items)).expect("serializable") + "\n")
            }
        }
    }
}

fn to_csv(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(contents.as_bytes())?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let p = Params(&cfg.params);
    match cfg.experiment {
        ExperimentId::Track => run_track(&p),
        ExperimentId::Gaps => run_gaps(&p),
        ExperimentId::Ring => run_ring(&p),
        ExperimentId::Subgroup => run_subgroup(&p),
        ExperimentId::Sup => run_sup(&p),
        ExperimentId::Tau => run_tau(&p),
        ExperimentId::Amalgam => run_amalgam(&p),
        ExperimentId::NbhdMember => run_nbhd_member(&p),
    }
}

fn tracked(p: &Params) -> Result<TrackedSeq> {
    let base = Params::wrap("base", p.base()?.build())?;
    let f: GrowthFn = p.parsed("f")?.unwrap_or(GrowthFn::Power(2));
    let eps: Epsilon = p.parsed("eps")?.unwrap_or(Epsilon::Default);
    let mut spec = TrackerSpec::new(f, eps, base);
    if p.has("level_cap") {
        spec = spec.with_level_cap(p.u64_or("level_cap", None)? as usize);
    }
    track(&spec, p.u64_or("N", None)?)
}

fn run_track(p: &Params) -> Result<Outcome> {
    let seq = tracked(p)?;
    let header = ["n", "f(n)", "eps(n)", "a_n", "k_n"].map(String::from).to_vec();
    let rows = seq
        .entries
        .iter()
        .map(|e| {
            vec![
                e.n.to_string(),
                e.f.to_string(),
                fmt_rat(&e.eps),
                e.a.to_string(),
                e.k.to_string(),
            ]
        })
        .collect();
    Ok(Outcome::Table { header, rows })
}

fn run_gaps(p: &Params) -> Result<Outcome> {
    let (label, values, first) = if p.has("seq") {
        let seq = IntSeq::new(p.req_parsed::<SeqPreset>("seq")?);
        let n = p.u64_or("N", None)?;
        (seq.to_string(), seq.terms(n)?, seq.first_index())
    } else {
        let t = tracked(p)?;
        (t.label.clone(), t.values(), t.first_index())
    };
    let blocks = p.text("blocks")?.unwrap_or_else(|| "dyadic".into());
    let blocking = if blocks == "dyadic" {
        Blocking::Dyadic
    } else {
        let w = Params::wrap("blocks", parse_int(&blocks))?;
        Blocking::Window(w.to_u64().ok_or_else(|| Params::err("blocks", "window out of range"))?)
    };
    let g = gap_stats(&values, first, blocking)?;
    let verdict = if g.violation_at.is_some() {
        Verdict::Refuted
    } else {
        Verdict::Certified
    };
    let mut r = WitnessReport::new("gap-growth", verdict)
        .param("seq", label)
        .param("blocks", &blocks)
        .param("N", first + values.len() as u64 - 1)
        .bound("gaps", values.len() - 1);
    if let Some(c) = &g.violation_at {
        r = r.bound("violation_at", c);
    }
    for b in &g.blocks {
        r.push(&[
            ("block", b.j.to_string()),
            ("start", b.start.to_string()),
            ("end", b.end.to_string()),
            ("min_gap", b.min_gap.to_string()),
        ]);
    }
    for t in &g.thresholds {
        r.push(&[
            ("bound", t.bound.to_string()),
            ("count", t.count.to_string()),
            (
                "last_position",
                t.last_position.map_or_else(|| "none".into(), |x| x.to_string()),
            ),
            ("persists", t.persists.to_string()),
        ]);
    }
    Ok(Outcome::Report(r))
}

fn run_ring(p: &Params) -> Result<Outcome> {
    let r_text = p.req_text("r")?;
    let r = RatioTarget::new(Params::wrap("r", parse_fraction(&r_text))?)?;
    let n = p.u64_or("N", None)?;
    let seq = gen_theorem2(&r, n)?;
    let default_k = (1u32..).take_while(|&k| 2 * 3u64.pow(k) <= n).last();
    let kmax = match p.int("kmax")? {
        Some(k) => k.to_u32().ok_or_else(|| Params::err("kmax", "out of range"))?,
        None => default_k.ok_or_else(|| Params::err("N", "N must be at least 6 to reach a special index"))?,
    };
    let obs = obstruction_witnesses(&seq, kmax)?;
    let verdict = if obs.certified {
        Verdict::Certified
    } else {
        Verdict::Refuted
    };
    let mut rep = WitnessReport::new("ring-obstruction", verdict)
        .param("r", fmt_rat(r.value()))
        .param("N", n)
        .param("kmax", kmax)
        .bound("special_indices", seq.special_indices().len());
    for w in &obs.witnesses {
        let m = 3u64.pow(w.k);
        rep.push(&[
            ("k", w.k.to_string()),
            ("n", (2 * m).to_string()),
            ("a_n", seq.get(2 * m)?.to_string()),
            ("a_half", seq.get(m)?.to_string()),
            ("difference", w.difference.to_string()),
        ]);
    }
    if p.has("ratio_from") || p.has("ratio_to") {
        let from = p.u64_or("ratio_from", Some(1))?;
        let to = p.u64_or("ratio_to", Some(n))?;
        let d = ratio_profile(&seq, from, to)?;
        rep = rep
            .bound("ratio_window", format!("[{from},{to})"))
            .bound("ratio_max_deviation", fmt_rat(&d.max))
            .bound("ratio_argmax", d.argmax);
    }
    Ok(Outcome::Report(rep))
}

fn run_subgroup(p: &Params) -> Result<Outcome> {
    let n0 = p.u64_or("n0", None)?;
    let count = p.u64_or("count", Some(10))? as usize;
    let fiber: FiberFn = p.parsed("fiber")?.unwrap_or_default();
    let h = SubgroupH::new(fiber.clone())?;
    let ws = compact_witness(n0, &fiber, count)?;
    let target = BigInt::from(n0 + 1);
    let mut ok = ws[0].is_zero();
    let mut rep_items = Vec::new();
    for w in &ws {
        let inh = in_h(w, &h)?;
        let norm = norm1(w);
        if !w.is_zero() {
            ok &= inh && norm == target;
        }
        rep_items.push(vec![
            ("element", w.to_string()),
            ("in_H", inh.to_string()),
            ("norm1", norm.to_string()),
        ]);
    }
    let verdict = if ok { Verdict::Certified } else { Verdict::Refuted };
    let mut rep = WitnessReport::new("compact-subset-of-H", verdict)
        .param("n0", n0)
        .param("count", count)
        .param("fiber", &fiber);
    for item in rep_items {
        rep.push(&item);
    }
    Ok(Outcome::Report(rep))
}

fn run_sup(p: &Params) -> Result<Outcome> {
    let a = IntSeq::new(p.req_parsed("a")?);
    let b = IntSeq::new(p.req_parsed("b")?);
    let g = p.req_int("g")?;
    let n = p.u64_or("N", None)?;
    Ok(Outcome::Report(diagonal_escape_report(&a, &b, &g, n)?))
}

fn run_tau(p: &Params) -> Result<Outcome> {
    let mode = match p.text("mode")? {
        Some(m) => m,
        None if p.has("n0") => "ball-cap".into(),
        None => "witness".into(),
    };
    match mode.as_str() {
        "ball-cap" => {
            let n0 = p.u64_or("n0", None)?;
            let n0 = u32::try_from(n0).map_err(|_| Params::err("n0", "out of range"))?;
            Ok(Outcome::Report(ball_cap_un(n0, p.u64_or("window", Some(8))?)?))
        }
        "witness" => {
            let n = p.u64_or("n", None)?;
            let n = u32::try_from(n).map_err(|_| Params::err("n", "out of range"))?;
            let nbhd: CanonicalNbhd = p.req_parsed("slots")?;
            let count = p.u64_or("count", Some(5))? as usize;
            let ws = nondiscrete_witness(n, &nbhd, count)?;
            let ok = ws.iter().all(|w| in_un(w, n) && member_nbhd_free(w, &nbhd));
            let mut rep = WitnessReport::new(
                "dyadic-nondiscrete",
                if ok { Verdict::Certified } else { Verdict::Refuted },
            )
            .param("n", n)
            .param("slots", &nbhd)
            .param("count", count);
            for w in &ws {
                rep.push(&[
                    ("element", w.to_string()),
                    ("in_U_n", in_un(w, n).to_string()),
                    ("in_V", member_nbhd_free(w, &nbhd).to_string()),
                ]);
            }
            Ok(Outcome::Report(rep))
        }
        other => Err(Params::err("mode", format!("unknown mode `{other}`"))),
    }
}

fn run_amalgam(p: &Params) -> Result<Outcome> {
    let c = p.req_int("c")?;
    let mode = p.text("mode")?.unwrap_or_else(|| "check".into());
    match mode.as_str() {
        "check" => {
            let bound = p.int("bound")?.unwrap_or_else(|| BigInt::from(1000));
            Ok(Outcome::Report(intersection_check(&c, &bound)?))
        }
        "push" => {
            let a = IntSeq::new(p.req_parsed("a")?);
            let terms = pushed_sequences(&a, &c, p.u64_or("N", None)?)?;
            let header = ["n", "a_n", "e1", "e2", "equal"].map(String::from).to_vec();
            let rows = terms
                .iter()
                .map(|t| {
                    vec![
                        t.n.to_string(),
                        t.a.to_string(),
                        t.first.to_string(),
                        t.second.to_string(),
                        (t.first == t.second).to_string(),
                    ]
                })
                .collect();
            Ok(Outcome::Table { header, rows })
        }
        other => Err(Params::err("mode", format!("unknown mode `{other}`"))),
    }
}

fn run_nbhd_member(p: &Params) -> Result<Outcome> {
    let seq_text = p.req_text("seq")?;
    let nbhd: CanonicalNbhd = p.req_parsed("slots")?;
    let x_text = p.req_text("x")?;
    let rep = WitnessReport::new("nbhd-member", Verdict::Inconclusive)
        .param("seq", &seq_text)
        .param("slots", &nbhd)
        .param("x", &x_text);
    if seq_text.trim() == "e" {
        let x: FinVec = Params::wrap("x", x_text.parse())?;
        let member = member_nbhd_free(&x, &nbhd);
        let mut rep = WitnessReport {
            verdict: if member { Verdict::Certified } else { Verdict::Refuted },
            ..rep
        }
        .bound("summands", norm1(&x));
        rep.push(&[("member", member.to_string()), ("decision", "exact".into())]);
        return Ok(Outcome::Report(rep));
    }
    let a = IntSeq::new(Params::wrap("seq", seq_text.parse::<SeqPreset>())?);
    let x = Params::wrap("x", parse_int(&x_text))?;
    let depth = p.u64_or("depth", Some(4))? as usize;
    let mut q = TailSumQuery::new(x, nbhd, depth)?
        .with_index_cap(p.u64_or("terms", Some(TailSumQuery::DEFAULT_INDEX_CAP))?);
    if p.has("budget") {
        q = q.with_node_budget(p.u64_or("budget", None)?);
    }
    let mut rep = rep
        .bound("depth_cap", depth)
        .bound("index_cap", q.index_cap)
        .bound("node_budget", q.node_budget);
    match member_nbhd_int(&a, &q)? {
        IntMembership::Member(summands) => {
            rep.verdict = Verdict::Certified;
            let sum: BigInt = summands.iter().map(|s| &s.value).sum();
            debug_assert_eq!(sum, q.target);
            for s in &summands {
                rep.push(&[
                    ("slot", s.slot.to_string()),
                    ("index", s.index.to_string()),
                    ("term", s.value.to_string()),
                ]);
            }
            if summands.is_empty() {
                rep.push(&[("member", "true".into()), ("sum", sum.to_string())]);
            }
        }
        IntMembership::NotMemberWithinCap {
            nodes,
            budget_exhausted,
        } => {
            rep = rep.bound("nodes", nodes);
            rep.push(&[
                ("member", "not-member-within-cap".into()),
                ("budget_exhausted", budget_exhausted.to_string()),
            ]);
        }
    }
    Ok(Outcome::Report(rep))
}
