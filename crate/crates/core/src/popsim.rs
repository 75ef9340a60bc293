//! Exact simulation of the branching population.
//!
//! Individuals grow as `x·e^{a(u−b)}` from their birth at time `b`, divide at
//! the first time their integrated hazard `∫ x_r φ(r) dr` exceeds a unit
//! exponential variate, and split into `θx` and `(1−θ)x` with `θ` uniform on
//! `[ε, 1−ε]`. Only `(birth_time, birth_size, division_time)` is stored per
//! individual; trajectories are reconstructed from the flow.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::functional::{PathFunctional, PathWindow};
use crate::model::ModelParams;
use crate::rng::{mix64, stream};

/// Ulam–Harris label: the root is `∅` and the children of `u` are `u0`, `u1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Label(Vec<u8>);

impl Label {
    pub fn root() -> Self {
        Label(Vec::new())
    }

    pub fn child(&self, bit: u8) -> Self {
        debug_assert!(bit < 2);
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(bit);
        Label(v)
    }

    pub fn generation(&self) -> usize {
        self.0.len()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn parent(&self) -> Option<Label> {
        let (_, head) = self.0.split_last()?;
        Some(Label(head.to_vec()))
    }

    pub fn is_ancestor_of(&self, other: &Label) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Stream id of this individual's random substream.
    pub fn stream_key(&self) -> u64 {
        self.0.iter().fold(0x0B5E_55ED_u64, |h, &b| mix64(h ^ (b as u64 + 1)))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "∅" {
            return Ok(Label::root());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("invalid label `{s}`"))),
            })
            .collect::<Result<Vec<u8>>>()
            .and_then(|v| if v.is_empty() { Err(Error::Parse("empty label".into())) } else { Ok(Label(v)) })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub label: Label,
    pub birth_time: f64,
    pub birth_size: f64,
    /// `None` if the individual is alive at the horizon (or when the forest
    /// was truncated before its division was processed).
    pub division_time: Option<f64>,
    parent: Option<usize>,
    children: Option<[usize; 2]>,
}

impl Individual {
    pub fn parent(&self) -> Option<usize> {
        self.parent
    }

    pub fn children(&self) -> Option<[usize; 2]> {
        self.children
    }

    fn alive_at(&self, t: f64) -> bool {
        self.birth_time <= t && self.division_time.is_none_or(|d| t < d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestCaps {
    /// Largest admissible number of simultaneously alive individuals.
    pub max_individuals: usize,
}

impl Default for ForestCaps {
    fn default() -> Self {
        ForestCaps { max_individuals: 100_000 }
    }
}

/// One realization of the branching population on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    individuals: Vec<Individual>,
    horizon: f64,
    root_size: f64,
    seed: u64,
    growth: f64,
    truncated_at: Option<f64>,
}

/// Ancestral trajectory of one individual alive at `origin + duration`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineageWindow {
    pub label: Label,
    pub origin: f64,
    pub duration: f64,
    pub growth: f64,
    pub start_value: f64,
    /// `(division time, size of the ancestor born then)` inside the window.
    pub jumps: Vec<(f64, f64)>,
}

impl LineageWindow {
    pub fn window(&self) -> PathWindow<'_> {
        PathWindow::new(self.origin, self.duration, self.growth, self.start_value, &self.jumps)
    }
}

/// Time at which the integrated division hazard of an individual of size
/// `x0` at time `t0` reaches `exp_variate`.
///
/// The hazard along the flow is `λ(u) = x0 e^{a(u−t0)} φ(u)`, so
/// `Λ(u) = x0·φ(t0,u)`. Constant environments invert in closed form; the
/// other profiles use Newton steps safeguarded by bisection inside the
/// bracket given by `φ1 ≤ φ ≤ φ2`.
pub fn sample_division_time(params: &ModelParams, t0: f64, x0: f64, exp_variate: f64) -> Result<f64> {
    if !(x0 > 0.0) {
        return Err(Error::domain(format!("division time needs a positive size, got {x0}")));
    }
    if !(t0 >= 0.0 && t0.is_finite()) {
        return Err(Error::domain(format!("start time must be finite and nonnegative, got {t0}")));
    }
    if !(exp_variate >= 0.0) {
        return Err(Error::domain(format!("hazard budget must be nonnegative, got {exp_variate}")));
    }
    if exp_variate == 0.0 {
        return Ok(t0);
    }
    let a = params.a();
    let time_for = |phi: f64| t0 + (a * exp_variate / (x0 * phi)).ln_1p() / a;
    if params.env().is_constant() {
        return Ok(time_for(params.phi1()));
    }
    let mut lo = time_for(params.phi2());
    let mut hi = time_for(params.phi1());
    let target = exp_variate / x0;
    let mut u = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = params.phi_integral_unchecked(t0, u)? - target;
        if f > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        if hi - lo <= 1e-10 {
            break;
        }
        let slope = (a * (u - t0)).exp() * params.phi(u);
        let newton = u - f / slope;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - u).abs() <= 1e-12 {
            u = next;
            break;
        }
        u = next;
    }
    Ok(u.clamp(lo, hi))
}

#[derive(Debug)]
struct Event {
    time: f64,
    label: Label,
    index: usize,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then_with(|| self.label.cmp(&other.label))
    }
}

/// Simulates the population started from one individual of size `x0` at time 0.
///
/// Events are processed in order of `(time, label)`. If a division would push
/// the number of alive individuals past `caps.max_individuals`, the
/// simulation stops there and the forest is flagged as truncated.
pub fn simulate_forest(params: &ModelParams, x0: f64, horizon: f64, seed: u64, caps: ForestCaps) -> Result<Forest> {
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(Error::domain(format!("initial size must be positive, got {x0}")));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!("horizon must be finite and nonnegative, got {horizon}")));
    }
    if caps.max_individuals < 1 {
        return Err(Error::invalid("caps.max_individuals", "max_individuals ≥ 1"));
    }
    let a = params.a();
    let eps = params.epsilon();
    let mut individuals: Vec<Individual> = Vec::new();
    // θ drawn for each individual at birth, used if it divides.
    let mut thetas: Vec<f64> = Vec::new();
    let mut queue: BinaryHeap<Reverse<Event>> = BinaryHeap::new();

    let spawn = |label: Label,
                 birth_time: f64,
                 birth_size: f64,
                 parent: Option<usize>,
                 individuals: &mut Vec<Individual>,
                 thetas: &mut Vec<f64>,
                 queue: &mut BinaryHeap<Reverse<Event>>|
     -> Result<()> {
        let mut rng = stream(seed, label.stream_key());
        let budget: f64 = rng.sample(Exp1);
        let theta = eps + (1.0 - 2.0 * eps) * rng.random::<f64>();
        let index = individuals.len();
        // Skip the root search when the hazard up to the horizon is too small.
        let reachable = birth_size * params.phi_integral_unchecked(birth_time, horizon)?;
        if budget <= reachable {
            let time = sample_division_time(params, birth_time, birth_size, budget)?;
            if time <= horizon {
                queue.push(Reverse(Event { time, label: label.clone(), index }));
            }
        }
        individuals.push(Individual { label, birth_time, birth_size, division_time: None, parent, children: None });
        thetas.push(theta);
        Ok(())
    };

    spawn(Label::root(), 0.0, x0, None, &mut individuals, &mut thetas, &mut queue)?;
    let mut alive = 1usize;
    let mut truncated_at = None;
    while let Some(Reverse(ev)) = queue.pop() {
        if alive + 1 > caps.max_individuals {
            truncated_at = Some(ev.time);
            break;
        }
        let parent = &individuals[ev.index];
        let size = parent.birth_size * (a * (ev.time - parent.birth_time)).exp();
        let theta = thetas[ev.index];
        // Split so that the two sizes add up to `size` exactly: the larger
        // part is rounded once and the smaller is an exact difference.
        let big = size * theta.max(1.0 - theta);
        let small = size - big;
        let (first, second) = if theta >= 0.5 { (big, small) } else { (small, big) };
        individuals[ev.index].division_time = Some(ev.time);
        let c0 = individuals.len();
        spawn(ev.label.child(0), ev.time, first, Some(ev.index), &mut individuals, &mut thetas, &mut queue)?;
        spawn(ev.label.child(1), ev.time, second, Some(ev.index), &mut individuals, &mut thetas, &mut queue)?;
        individuals[ev.index].children = Some([c0, c0 + 1]);
        alive += 1;
    }
    Ok(Forest { individuals, horizon, root_size: x0, seed, growth: a, truncated_at })
}

impl Forest {
    pub(crate) fn from_parts(
        individuals: Vec<Individual>,
        horizon: f64,
        root_size: f64,
        seed: u64,
        growth: f64,
        truncated_at: Option<f64>,
    ) -> Self {
        Forest { individuals, horizon, root_size, seed, growth, truncated_at }
    }

    pub(crate) fn bare_individual(
        label: Label,
        birth_time: f64,
        birth_size: f64,
        division_time: Option<f64>,
    ) -> Individual {
        Individual { label, birth_time, birth_size, division_time, parent: None, children: None }
    }

    /// Rebuilds parent/children links from labels (used when reading dumps).
    pub(crate) fn link(individuals: &mut [Individual]) -> Result<()> {
        use std::collections::HashMap;
        let index: HashMap<Label, usize> = individuals.iter().enumerate().map(|(i, v)| (v.label.clone(), i)).collect();
        for i in 0..individuals.len() {
            let label = individuals[i].label.clone();
            if let Some(p) = label.parent() {
                let pi =
                    *index.get(&p).ok_or_else(|| Error::Parse(format!("label {label} has no parent in the dump")))?;
                individuals[i].parent = Some(pi);
                let bit = *label.bits().last().expect("non-root label") as usize;
                let mut kids = individuals[pi].children.unwrap_or([usize::MAX; 2]);
                kids[bit] = i;
                individuals[pi].children = Some(kids);
            }
        }
        if individuals.iter().any(|v| v.children.is_some_and(|k| k.contains(&usize::MAX))) {
            return Err(Error::Parse("a divided individual is missing a child".into()));
        }
        Ok(())
    }

    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn root_size(&self) -> f64 {
        self.root_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn truncated(&self) -> bool {
        self.truncated_at.is_some()
    }

    pub fn truncated_at(&self) -> Option<f64> {
        self.truncated_at
    }

    /// Size of individual `index` at time `t` along the deterministic flow.
    pub fn size_at(&self, index: usize, t: f64) -> f64 {
        let v = &self.individuals[index];
        v.birth_size * (self.growth * (t - v.birth_time)).exp()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::domain(format!("time {t} outside [0, {}]", self.horizon)));
        }
        if let Some(at) = self.truncated_at {
            if t >= at {
                return Err(Error::Truncated { at });
            }
        }
        Ok(())
    }

    fn alive_indices(&self, t: f64) -> impl Iterator<Item = usize> + '_ {
        self.individuals.iter().enumerate().filter(move |(_, v)| v.alive_at(t)).map(|(i, _)| i)
    }

    /// `N_t`.
    pub fn count_at(&self, t: f64) -> Result<usize> {
        self.check_time(t)?;
        Ok(self.alive_indices(t).count())
    }

    /// Labels and sizes of every individual alive at `t`.
    pub fn population_at(&self, t: f64) -> Result<Vec<(Label, f64)>> {
        self.check_time(t)?;
        Ok(self.alive_indices(t).map(|i| (self.individuals[i].label.clone(), self.size_at(i, t))).collect())
    }

    /// Index of the ancestor of `index` alive at time `s` (possibly itself).
    pub fn ancestor_at(&self, index: usize, s: f64) -> Option<usize> {
        let mut i = index;
        loop {
            let v = &self.individuals[i];
            if v.birth_time <= s {
                return v.alive_at(s).then_some(i);
            }
            i = v.parent?;
        }
    }

    /// Collects the jumps of `index`'s lineage in `(t, ∞)` into `buf`, in
    /// increasing time order, and returns the lineage's size at `t`.
    fn lineage_into(&self, index: usize, t: f64, buf: &mut Vec<(f64, f64)>) -> f64 {
        buf.clear();
        let mut i = index;
        loop {
            let v = &self.individuals[i];
            if v.birth_time <= t {
                buf.reverse();
                return self.size_at(i, t);
            }
            buf.push((v.birth_time, v.birth_size));
            i = v.parent.expect("non-root individuals born after t have a parent");
        }
    }

    fn check_window(&self, t: f64, duration: f64) -> Result<()> {
        if !(t >= 0.0 && duration >= 0.0) {
            return Err(Error::domain(format!("window needs t ≥ 0 and T ≥ 0, got t={t}, T={duration}")));
        }
        if t + duration > self.horizon {
            return Err(Error::domain(format!("window end {} beyond horizon {}", t + duration, self.horizon)));
        }
        if let Some(at) = self.truncated_at {
            return Err(Error::Truncated { at });
        }
        Ok(())
    }

    /// Ancestral windows `(X^u_{t+s}, s ≤ T)` of every `u` alive at `t + T`.
    pub fn lineage_windows(&self, t: f64, duration: f64) -> Result<Vec<LineageWindow>> {
        self.check_window(t, duration)?;
        let end = t + duration;
        let mut buf = Vec::new();
        Ok(self
            .alive_indices(end)
            .map(|i| {
                let start_value = self.lineage_into(i, t, &mut buf);
                LineageWindow {
                    label: self.individuals[i].label.clone(),
                    origin: t,
                    duration,
                    growth: self.growth,
                    start_value,
                    jumps: buf.clone(),
                }
            })
            .collect())
    }

    /// `Σ_{u ∈ V_{t+T}} F(X^u_{t+s}, s ≤ T)`, together with `N_{t+T}`.
    pub fn lineage_sum_and_count<F: PathFunctional + ?Sized>(
        &self,
        t: f64,
        duration: f64,
        f: &F,
    ) -> Result<(f64, usize)> {
        self.check_window(t, duration)?;
        let end = t + duration;
        let mut buf = Vec::new();
        let mut sum = 0.0;
        let mut count = 0;
        for i in self.alive_indices(end) {
            let start = self.lineage_into(i, t, &mut buf);
            sum += f.eval(&PathWindow::new(t, duration, self.growth, start, &buf));
            count += 1;
        }
        Ok((sum, count))
    }
}

/// `Σ_{u ∈ V_{t+T}} F(X^u_{t+s}, s ≤ T)` for one forest.
pub fn lineage_functional_sum<F: PathFunctional + ?Sized>(
    forest: &Forest,
    t: f64,
    duration: f64,
    f: &F,
) -> Result<f64> {
    forest.lineage_sum_and_count(t, duration, f).map(|(s, _)| s)
}

/// Writes a forest in the delimited dump format, one record per individual
/// in creation order.
///
/// ```text
/// # forest-dump v1 horizon=<h> root_size=<x0> seed=<seed> growth=<a> truncated_at=<t or ->
/// label<TAB>birth_time<TAB>birth_size<TAB>division_time
/// ∅<TAB>0<TAB>1<TAB>0.734…
/// ```
///
/// Labels are Ulam–Harris words (`∅` for the root) and an absent division
/// time is written as `-`. Numbers use the shortest representation that
/// parses back to the same `f64`.
pub fn write_forest_dump(forest: &Forest) -> String {
    use std::fmt::Write as _;
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| x.to_string());
    let mut out = format!(
        "# forest-dump v1 horizon={} root_size={} seed={} growth={} truncated_at={}\nlabel\tbirth_time\tbirth_size\tdivision_time\n",
        forest.horizon,
        forest.root_size,
        forest.seed,
        forest.growth,
        opt(forest.truncated_at)
    );
    for v in &forest.individuals {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", v.label, v.birth_time, v.birth_size, opt(v.division_time));
    }
    out
}

/// Parses the output of [`write_forest_dump`].
pub fn read_forest_dump(text: &str) -> Result<Forest> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|l| l.strip_prefix("# forest-dump v1 "))
        .ok_or_else(|| Error::Parse("missing `# forest-dump v1` header".into()))?;
    let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}`")));
    let opt = |s: &str| if s == "-" { Ok(None) } else { num(s).map(Some) };
    let (mut horizon, mut root_size, mut seed, mut growth, mut truncated_at) = (None, None, None, None, None);
    for kv in header.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("bad field `{kv}`")))?;
        match k {
            "horizon" => horizon = Some(num(v)?),
            "root_size" => root_size = Some(num(v)?),
            "seed" => seed = Some(v.parse::<u64>().map_err(|_| Error::Parse(format!("bad seed `{v}`")))?),
            "growth" => growth = Some(num(v)?),
            "truncated_at" => truncated_at = Some(opt(v)?),
            _ => return Err(Error::Parse(format!("unknown field `{k}`"))),
        }
    }
    let missing = |f: &str| Error::Parse(format!("header lacks `{f}`"));
    if lines.next() != Some("label\tbirth_time\tbirth_size\tdivision_time") {
        return Err(Error::Parse("missing column header".into()));
    }
    let mut individuals = Vec::new();
    for line in lines {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(Error::Parse(format!("expected 4 columns, got `{line}`")));
        }
        individuals.push(Forest::bare_individual(cols[0].parse()?, num(cols[1])?, num(cols[2])?, opt(cols[3])?));
    }
    Forest::link(&mut individuals)?;
    Ok(Forest::from_parts(
        individuals,
        horizon.ok_or_else(|| missing("horizon"))?,
        root_size.ok_or_else(|| missing("root_size"))?,
        seed.ok_or_else(|| missing("seed"))?,
        growth.ok_or_else(|| missing("growth"))?,
        truncated_at.ok_or_else(|| missing("truncated_at"))?,
    ))
}
