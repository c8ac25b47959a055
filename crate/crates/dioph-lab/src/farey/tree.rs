//! Restricted fractal trees: level schedules, recursive construction with
//! deterministic caps, the self-similarity validators, and root-to-leaf
//! chain certificates.

use super::children::{children_of, Restriction};
use super::cone::cone_decomposition;
use super::{farey_lattice, FareyError, QPoint};
use crate::exact::interval::RatInterval;
use crate::exact::powcmp::PowProd;
use crate::exact::quad::Quad;
use crate::exact::rational::{pow_i64, rat_int, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::Serialize;
use std::cmp::Ordering;

/// Level schedule: `eps_i = eta 4^{-i}`, `N_i = ceil(eta^{-1} 5^{(n/delta) i})`
/// capped at `n_cap` (levels beyond the cap use the cap).
#[derive(Clone, Debug, Serialize)]
pub struct Schedule {
    #[serde(with = "crate::exact::rational::rat_string")]
    pub eta: Rat,
    #[serde(with = "crate::exact::rational::rat_string")]
    pub delta: Rat,
    pub n: usize,
    pub n_cap: Option<u64>,
}

impl Schedule {
    pub fn new(eta: Rat, delta: Rat, n: usize, n_cap: Option<u64>) -> Self {
        assert!(eta.is_positive() && eta < Rat::one(), "eta must lie in (0,1)");
        assert!(delta.is_positive());
        assert!(n >= 2);
        Schedule { eta, delta, n, n_cap }
    }

    pub fn eps(&self, i: usize) -> Rat {
        &self.eta / pow_i64(&rat_int(4), i as i64)
    }

    /// `N_i`, exact ceiling with the cap applied.
    pub fn n_levels(&self, i: usize) -> u64 {
        let e = Rat::new(BigInt::from(self.n as i64), BigInt::from(1))
            / &self.delta
            * rat_int(i as i64);
        let p = PowProd::new(Rat::one() / &self.eta, vec![(rat_int(5), e)]);
        if let Some(cap) = self.n_cap {
            if p.cmp_rat(&rat_int(cap as i64)) != Ordering::Less {
                return cap;
            }
        }
        let f = crate::transfer::powprod_floor(&p);
        let n = if p.cmp_rat(&rat_int(f)) == Ordering::Equal { f } else { f + 1 };
        n.max(1) as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TreeMode {
    /// Level thresholds `|b q|_Z > eta 2^{-(i+1)}` with the full schedule.
    SingB,
    /// Constant level: `eps = eta`, `N = N_0`, restriction `|b q|_Z >= 1/d`.
    DiEps { d: u64 },
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct TreeCaps {
    pub alphas_per_node: Option<usize>,
    pub children_per_alpha: Option<usize>,
    pub children_per_node: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FractalNode {
    pub point: QPoint,
    pub level: usize,
    #[serde(with = "crate::exact::rational::rat_vec_string")]
    pub ball_center: Vec<Rat>,
    #[serde(with = "crate::exact::rational::rat_string")]
    pub ball_radius_sq: Rat,
    #[serde(with = "crate::exact::rational::rat_string")]
    pub lambda1_sq: Rat,
    pub rho: PowProd,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Exact cardinality record of one expanded fiber.
#[derive(Clone, Debug, Serialize)]
pub struct ZetaRecord {
    pub parent: usize,
    pub cone_level: u64,
    pub count_full: u64,
    pub count_restricted: u64,
    /// Parent height clears twice the child threshold (the hypothesis of
    /// the counting sandwich).
    pub parent_weight_clears: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FractalTree {
    pub nodes: Vec<FractalNode>,
    pub root: usize,
    pub mode: TreeMode,
    pub schedule: Schedule,
    pub b: Quad,
    #[serde(with = "crate::exact::rational::rat_string")]
    pub slope: Rat,
    #[serde(with = "crate::exact::rational::rat_string")]
    pub c_rho: Rat,
    pub caps: TreeCaps,
    pub zeta_log: Vec<ZetaRecord>,
}

impl FractalTree {
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty()).collect()
    }

    /// Nodes along the leftmost root-to-leaf path.
    pub fn leftmost_path(&self) -> Vec<usize> {
        let mut path = vec![self.root];
        let mut cur = self.root;
        while let Some(&c) = self.nodes[cur].children.first() {
            path.push(c);
            cur = c;
        }
        path
    }

    pub fn path_to(&self, leaf: usize) -> Vec<usize> {
        let mut path = vec![leaf];
        let mut cur = leaf;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    fn level_params(&self, level: usize) -> (Rat, u64) {
        match self.mode {
            TreeMode::SingB => (self.schedule.eps(level), self.schedule.n_levels(level)),
            TreeMode::DiEps { .. } => (self.schedule.eta.clone(), self.schedule.n_levels(0)),
        }
    }

    fn restriction_for(&self, child_level: usize) -> Restriction {
        match self.mode {
            TreeMode::SingB => Restriction::BqGreater {
                b: self.b.clone(),
                threshold: &self.schedule.eta / pow_i64(&rat_int(2), child_level as i64),
            },
            TreeMode::DiEps { d } => Restriction::BqAtLeastInv { b: self.b.clone(), d },
        }
    }

    /// `rho` for a node at `level`, from the level data actually used.
    fn rho_at(&self, level: usize) -> PowProd {
        let n = self.schedule.n as i64;
        let (eps, nl) = self.level_params(level);
        let e1 = Rat::new(BigInt::from(n + 1), BigInt::from(n - 1));
        let e2 = Rat::new(BigInt::from(2 * n), BigInt::from(n - 1)) + rat_int(n);
        PowProd::new(
            self.c_rho.clone(),
            vec![(rat_int(nl as i64), -e1), (eps, e2)],
        )
    }

    /// `(rho diam B)^s` as an exact power product.
    fn weight_pow(&self, idx: usize, s: &Rat) -> PowProd {
        let node = &self.nodes[idx];
        // diam = 2 * sqrt(radius_sq) => diam^2 = 4 radius_sq
        let diam_sq = &node.ball_radius_sq * rat_int(4);
        let diam = PowProd::new(Rat::one(), vec![(diam_sq, Rat::new(1.into(), 2.into()))]);
        node.rho.mul(&diam).pow(s)
    }
}

/// Build the restricted tree from a seed point `x0`: the level-0 children
/// select the tree root, then each level expands by the restricted fiber
/// sets. Deterministic caps trim to the smallest cone levels and heights.
pub fn build_tree(
    x0: &QPoint,
    schedule: Schedule,
    b: Quad,
    depth: usize,
    mode: TreeMode,
    slope: Rat,
    c_rho: Rat,
    caps: TreeCaps,
) -> Result<FractalTree, FareyError> {
    assert!(depth >= 1);
    let mut tree = FractalTree {
        nodes: Vec::new(),
        root: 0,
        mode,
        schedule,
        b,
        slope,
        c_rho,
        caps,
        zeta_log: Vec::new(),
    };
    // Level 0: pick the root x1 from the restricted children of x0.
    let first = expand_point(&mut tree, x0, 0, None)?;
    if first.is_empty() {
        return Err(FareyError::EmptyLevel { level: 0, height: x0.q });
    }
    // expand_point pushed candidate children as nodes; keep only the first
    // as the root and drop the rest.
    tree.nodes.truncate(1);
    tree.zeta_log.clear();
    tree.root = 0;
    // Breadth-first expansion to the requested depth.
    let mut frontier = vec![0usize];
    while let Some(idx) = frontier.pop() {
        let level = tree.nodes[idx].level;
        if level >= depth {
            continue;
        }
        let point = tree.nodes[idx].point.clone();
        let kids = expand_point(&mut tree, &point, level, Some(idx))?;
        if kids.is_empty() {
            return Err(FareyError::EmptyLevel { level, height: point.q });
        }
        frontier.extend(kids);
    }
    Ok(tree)
}

/// Expand one point at `level`; returns indices of the created child nodes
/// (when `parent` is set) or scratch nodes for root selection.
fn expand_point(
    tree: &mut FractalTree,
    point: &QPoint,
    level: usize,
    parent: Option<usize>,
) -> Result<Vec<usize>, FareyError> {
    let (eps, nl) = tree.level_params(level);
    let restriction = tree.restriction_for(level + 1);
    let lat = farey_lattice(point)?;
    let cone = cone_decomposition(&lat, &tree.slope)?;
    let dirs = children_of(
        &lat,
        &cone,
        &eps,
        nl,
        &restriction,
        tree.caps.alphas_per_node,
        tree.caps.children_per_alpha,
    )?;
    // The counting sandwich hypothesis: the parent height clears twice the
    // child threshold.
    let parent_weight = (&tree.b * &Quad::from_int(point.q as i64)).dist_to_int();
    let clears = match &restriction {
        Restriction::None => true,
        Restriction::BqGreater { threshold, .. } => {
            parent_weight > Quad::from_rat(threshold * rat_int(2))
        }
        Restriction::BqAtLeastInv { d, .. } => {
            parent_weight >= Quad::from_rat(Rat::new(BigInt::one(), BigInt::from(*d)))
        }
    };
    let mut created = Vec::new();
    let child_rho = tree.rho_at(level + 1);
    'dirs: for d in &dirs {
        if let Some(pidx) = parent {
            tree.zeta_log.push(ZetaRecord {
                parent: pidx,
                cone_level: d.cone_level,
                count_full: d.fiber.count_full,
                count_restricted: d.fiber.count_restricted,
                parent_weight_clears: clears,
            });
        }
        for y in &d.children {
            let ylat = farey_lattice(y)?;
            let node = FractalNode {
                point: y.clone(),
                level: level + 1,
                ball_center: y.base(),
                ball_radius_sq: ylat.ball_radius_sq(),
                lambda1_sq: ylat.lambda1_sq(),
                rho: child_rho.clone(),
                parent,
                children: Vec::new(),
            };
            tree.nodes.push(node);
            let idx = tree.nodes.len() - 1;
            if let Some(pidx) = parent {
                tree.nodes[pidx].children.push(idx);
            }
            created.push(idx);
            if tree.caps.children_per_node.map_or(false, |c| created.len() >= c) {
                break 'dirs;
            }
        }
    }
    Ok(created)
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeRatio {
    pub node: usize,
    pub level: usize,
    pub lo: f64,
    pub hi: f64,
    /// Certified verdict of `ratio >= 1`, when the interval decides it.
    pub ge_one: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub edges: usize,
    pub nesting_failures: Vec<(usize, usize)>,
    pub diam_failures: Vec<(usize, usize)>,
    pub condition3_failures: Vec<(usize, usize)>,
    pub sandwich_checked: usize,
    pub sandwich_failures: usize,
    pub node_ratios: Vec<NodeRatio>,
    /// Representative ratio per level (at the leftmost-path node).
    pub level_ratios: Vec<NodeRatio>,
}

impl ValidationReport {
    pub fn nesting_ok(&self) -> bool {
        self.nesting_failures.is_empty() && self.diam_failures.is_empty()
    }

    pub fn condition3_ok(&self) -> bool {
        self.condition3_failures.is_empty()
    }

    pub fn sandwich_ok(&self) -> bool {
        self.sandwich_failures == 0
    }
}

/// Strict ball nesting along an edge, decided exactly:
/// `||c_y - c_x|| + r_y < r_x` via two squarings.
fn nested_strictly(cx: &[Rat], rx_sq: &Rat, cy: &[Rat], ry_sq: &Rat) -> bool {
    if rx_sq <= ry_sq {
        return false;
    }
    let d_sq = crate::exact::linalg::norm_sq(&crate::exact::linalg::vec_sub(cy, cx));
    // need d < rx - ry with rx > ry:
    // d^2 + ry^2 - rx^2 < -2 rx ry is wrong sign; use:
    // d < rx - ry <=> d^2 < rx^2 + ry^2 - 2 rx ry
    //            <=> rx^2 + ry^2 - d^2 > 2 rx ry (both sides may be signed)
    let lhs = rx_sq + ry_sq - &d_sq;
    if !lhs.is_positive() {
        return false;
    }
    // square: lhs^2 > 4 rx^2 ry^2
    &lhs * &lhs > rat_int(4) * rx_sq * ry_sq
}

/// Validate the three structural conditions on the built tree, plus the
/// counting sandwich on every expanded fiber, plus per-node sum ratios at
/// the exponent `s` (certified interval verdicts against one).
pub fn validate_selfsimilar(tree: &FractalTree, s: &Rat) -> ValidationReport {
    let mut nesting_failures = Vec::new();
    let mut diam_failures = Vec::new();
    let mut condition3_failures = Vec::new();
    let mut edges = 0;
    for (i, node) in tree.nodes.iter().enumerate() {
        for &c in &node.children {
            edges += 1;
            let child = &tree.nodes[c];
            if !nested_strictly(
                &node.ball_center,
                &node.ball_radius_sq,
                &child.ball_center,
                &child.ball_radius_sq,
            ) {
                nesting_failures.push((i, c));
            }
            if child.ball_radius_sq >= node.ball_radius_sq {
                diam_failures.push((i, c));
            }
            // condition (3): rho(y) diam B(y) < rho(x) diam B(x), exact.
            let wx = tree.weight_pow(i, &Rat::one());
            let wy = tree.weight_pow(c, &Rat::one());
            if wy.cmp(&wx) != Ordering::Less {
                condition3_failures.push((i, c));
            }
        }
    }
    let mut sandwich_failures = 0;
    let mut sandwich_checked = 0;
    for z in &tree.zeta_log {
        if !z.parent_weight_clears {
            continue;
        }
        sandwich_checked += 1;
        if 2 * z.count_restricted < z.count_full || z.count_restricted > z.count_full {
            sandwich_failures += 1;
        }
    }
    // Sum ratios.
    let mut node_ratios = Vec::new();
    for (i, node) in tree.nodes.iter().enumerate() {
        if node.children.is_empty() {
            continue;
        }
        let denom = tree.weight_pow(i, s);
        let mut terms = Vec::new();
        for &c in &node.children {
            terms.push(tree.weight_pow(c, s).mul(&denom.recip()));
        }
        let (lo, hi, ge_one) = sum_interval_verdict(&terms);
        node_ratios.push(NodeRatio { node: i, level: node.level, lo, hi, ge_one });
    }
    let mut level_ratios = Vec::new();
    for &idx in &tree.leftmost_path() {
        if let Some(r) = node_ratios.iter().find(|r| r.node == idx) {
            level_ratios.push(r.clone());
        }
    }
    ValidationReport {
        edges,
        nesting_failures,
        diam_failures,
        condition3_failures,
        sandwich_checked,
        sandwich_failures,
        node_ratios,
        level_ratios,
    }
}

/// Certified interval sum of power products with a `>= 1` verdict.
fn sum_interval_verdict(terms: &[PowProd]) -> (f64, f64, Option<bool>) {
    let mut bits = 32u32;
    loop {
        let mut lo = Rat::from_integer(0.into());
        let mut hi = Rat::from_integer(0.into());
        for t in terms {
            let iv = powprod_interval(t, bits);
            lo += iv.lo;
            hi += iv.hi;
        }
        let sum = RatInterval::new(lo, hi);
        let lo_f = crate::exact::rational::rat_to_f64(&sum.lo);
        let hi_f = crate::exact::rational::rat_to_f64(&sum.hi);
        match sum.cmp_rat(&Rat::one()) {
            Some(Ordering::Greater) => return (lo_f, hi_f, Some(true)),
            Some(Ordering::Less) => return (lo_f, hi_f, Some(false)),
            _ => {
                if sum.lo == sum.hi {
                    // exactly one
                    return (lo_f, hi_f, Some(true));
                }
                bits *= 2;
                if bits > 512 {
                    return (lo_f, hi_f, None);
                }
            }
        }
    }
}

/// Certified enclosure of a power product.
pub fn powprod_interval(p: &PowProd, bits: u32) -> RatInterval {
    let mut iv = RatInterval::point(p.coeff.clone());
    for (b, e) in &p.factors {
        let f = crate::exact::interval::pow_interval(b, e, bits);
        iv = iv.mul(&f).round_out(bits + 8);
    }
    iv
}

/// Exact comparison of certified enclosures with adaptive refinement:
/// returns the ordering of the two ratio sums when decidable.
pub fn cmp_ratio_intervals(a: &[PowProd], b: &[PowProd]) -> Option<Ordering> {
    let mut bits = 32u32;
    loop {
        let sum = |ts: &[PowProd], bits: u32| {
            let mut lo = Rat::from_integer(0.into());
            let mut hi = Rat::from_integer(0.into());
            for t in ts {
                let iv = powprod_interval(t, bits);
                lo += iv.lo;
                hi += iv.hi;
            }
            RatInterval::new(lo, hi)
        };
        let ia = sum(a, bits);
        let ib = sum(b, bits);
        if let Some(o) = ia.cmp_interval(&ib) {
            return Some(o);
        }
        bits *= 2;
        if bits > 512 {
            return None;
        }
    }
}

/// Separation count at a node: the largest number of other children
/// within `rho(x) diam B(x)` of some child's ball. `None` for leaves.
/// Ambiguous interval comparisons are counted conservatively (included).
pub fn separation_count(tree: &FractalTree, idx: usize) -> Option<u64> {
    let node = &tree.nodes[idx];
    if node.children.is_empty() {
        return None;
    }
    let dist_pow = tree.weight_pow(idx, &Rat::one());
    let mut worst = 0u64;
    for &a in &node.children {
        let mut close = 0u64;
        for &b in &node.children {
            if a == b {
                continue;
            }
            if balls_within(tree, a, b, &dist_pow) {
                close += 1;
            }
        }
        worst = worst.max(close);
    }
    Some(worst)
}

/// `d(B(a), B(b)) <= dist`, i.e. `||c_a - c_b|| <= r_a + r_b + dist`,
/// decided by certified intervals (ambiguity counts as within).
fn balls_within(tree: &FractalTree, a: usize, b: usize, dist: &PowProd) -> bool {
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    let na = &tree.nodes[a];
    let nb = &tree.nodes[b];
    let d_sq = crate::exact::linalg::norm_sq(&crate::exact::linalg::vec_sub(
        &na.ball_center,
        &nb.ball_center,
    ));
    let lhs = vec![PowProd::new(Rat::one(), vec![(d_sq, half.clone())])];
    let rhs = vec![
        PowProd::new(Rat::one(), vec![(na.ball_radius_sq.clone(), half.clone())]),
        PowProd::new(Rat::one(), vec![(nb.ball_radius_sq.clone(), half)]),
        dist.clone(),
    ];
    !matches!(cmp_ratio_intervals(&lhs, &rhs), Some(Ordering::Greater))
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainStep {
    pub level: usize,
    pub height: u64,
    /// Ball supremum of `||q_i theta - p_i||` beats `2 eps_i |x_{i+1}|^{-1/n}`.
    pub sup_bound_ok: bool,
    /// The node's weight clears its admission threshold.
    pub weight_ok: bool,
    /// Endpoint identities tying the window to the weighted system.
    pub identity_ok: bool,
    /// Effective weighted level achieved on this window.
    pub effective_eps: PowProd,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub leaf: usize,
    pub steps: Vec<ChainStep>,
}

/// Verify the chain inequalities along the path to a leaf, with the leaf
/// ball as the target set: every point of the deepest ball is witnessed at
/// each level of the path.
pub fn chain_certificate(tree: &FractalTree, leaf: usize) -> Result<ChainReport, FareyError> {
    let path = tree.path_to(leaf);
    if path.len() < 2 {
        return Ok(ChainReport { leaf, steps: Vec::new() });
    }
    let deepest = &tree.nodes[*path.last().unwrap()];
    let ball_c = deepest.ball_center.clone();
    let ball_r_sq = deepest.ball_radius_sq.clone();
    let n = tree.schedule.n as i64;
    let mut steps = Vec::new();
    for w in path.windows(2) {
        let (xi, xi1) = (&tree.nodes[w[0]], &tree.nodes[w[1]]);
        let level = xi.level;
        let (eps, _) = tree.level_params(level);
        let qi = xi.point.q;
        // sup over the deepest ball of ||q_i theta - p_i||_inf, exactly:
        // per coordinate |q_i c_j - p_ij| + q_i sqrt(ball_r_sq).
        let mut sup: Option<Quad> = None;
        for (j, c) in ball_c.iter().enumerate() {
            let lin = (c * rat_int(qi as i64) - rat_int(xi.point.p[j])).abs();
            let v = Quad::new(lin, rat_int(qi as i64), ball_r_sq.clone());
            if sup.as_ref().map_or(true, |s| &v > s) {
                sup = Some(v);
            }
        }
        let sup = sup.expect("nonempty coordinates");
        // sup^n * |x_{i+1}| < 2^n eps^n
        let rhs = pow_i64(&rat_int(2), n) * pow_i64(&eps, n);
        let sup_bound_ok =
            sup.pow(n as u32) * Quad::from_int(xi1.point.q as i64) < Quad::from_rat(rhs);
        // weight check and endpoint identities per mode.
        let weight = (&tree.b * &Quad::from_int(qi as i64)).dist_to_int();
        let (weight_ok, identity_ok, effective_eps) = match tree.mode {
            TreeMode::SingB => {
                let thr = &tree.schedule.eta / pow_i64(&rat_int(2), level as i64);
                let weight_ok = weight > Quad::from_rat(thr.clone());
                // identity: 2 eps_i q_{i+1}^{-1/n}
                //         = 2^{1+1/n} eps_i (eta^{-1} 2^i)^{1/n} X_hi^{-1/n}
                // with X_hi = eta^{-1} 2^{i+1} q_{i+1}; and q_i = eta 2^{-i} X_lo.
                let inv_n = Rat::new(BigInt::one(), BigInt::from(n));
                let lhs = PowProd::new(
                    rat_int(2) * &eps,
                    vec![(rat_int(xi1.point.q as i64), -inv_n.clone())],
                );
                let scale = Rat::one() / &tree.schedule.eta * pow_i64(&rat_int(2), level as i64);
                let x_hi = &scale * rat_int(2) * rat_int(xi1.point.q as i64);
                let rhs_id = PowProd::new(
                    rat_int(2) * &eps,
                    vec![
                        (rat_int(2), inv_n.clone()),
                        (scale.clone(), inv_n.clone()),
                        (x_hi.clone(), -inv_n.clone()),
                    ],
                );
                let id1 = lhs.cmp(&rhs_id) == Ordering::Equal;
                let x_lo = &scale * rat_int(qi as i64);
                let id2 = rat_int(qi as i64) == &tree.schedule.eta / pow_i64(&rat_int(2), level as i64) * &x_lo;
                // effective eps: 2^{1+1/n} eps_i (eta^{-1} 2^i)^{1+1/n}
                let one_plus = Rat::one() + &inv_n;
                let eff = PowProd::new(
                    rat_int(2) * &eps,
                    vec![(rat_int(2), inv_n.clone()), (scale, one_plus)],
                );
                (weight_ok, id1 && id2, eff)
            }
            TreeMode::DiEps { d } => {
                let inv_d = Rat::new(BigInt::one(), BigInt::from(d));
                let weight_ok = weight >= Quad::from_rat(inv_d.clone());
                let inv_n = Rat::new(BigInt::one(), BigInt::from(n));
                let lhs = PowProd::new(
                    rat_int(2) * &eps,
                    vec![(rat_int(xi1.point.q as i64), -inv_n.clone())],
                );
                let x_hi = rat_int(d as i64) * rat_int(xi1.point.q as i64);
                let rhs_id = PowProd::new(
                    rat_int(2) * &eps,
                    vec![(rat_int(d as i64), inv_n.clone()), (x_hi, -inv_n.clone())],
                );
                let id1 = lhs.cmp(&rhs_id) == Ordering::Equal;
                // |q_i| < X/d on the open window (X > d q_i): equality at
                // the endpoint.
                let id2 = rat_int(qi as i64) == rat_int(d as i64) * rat_int(qi as i64) * &inv_d;
                let one_plus = Rat::one() + &inv_n;
                let eff = PowProd::new(
                    rat_int(2) * &eps,
                    vec![(rat_int(d as i64), one_plus)],
                );
                (weight_ok, id1 && id2, eff)
            }
        };
        if !(sup_bound_ok && weight_ok && identity_ok) {
            return Err(FareyError::CertificateFailure {
                index: level,
                what: format!(
                    "sup_bound={sup_bound_ok} weight={weight_ok} identity={identity_ok}"
                ),
            });
        }
        steps.push(ChainStep {
            level,
            height: qi,
            sup_bound_ok,
            weight_ok,
            identity_ok,
            effective_eps,
        });
    }
    Ok(ChainReport { leaf, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;

    fn default_tree(depth: usize) -> FractalTree {
        let x0 = QPoint::new(vec![0, 0], 1);
        let sched = Schedule::new(rat(1, 2), rat(1, 4), 2, Some(8));
        build_tree(
            &x0,
            sched,
            Quad::from_rat(rat(1, 2)),
            depth,
            TreeMode::SingB,
            rat_int(1),
            rat_int(1),
            TreeCaps {
                alphas_per_node: Some(6),
                children_per_alpha: Some(4),
                children_per_node: Some(12),
            },
        )
        .unwrap()
    }

    #[test]
    fn schedule_values() {
        let s = Schedule::new(rat(1, 2), rat(1, 4), 2, Some(50));
        assert_eq!(s.eps(0), rat(1, 2));
        assert_eq!(s.eps(2), rat(1, 32));
        assert_eq!(s.n_levels(0), 2); // ceil(1/eta) = 2
        assert_eq!(s.n_levels(1), 50); // 2 * 5^8 capped
        let s2 = Schedule::new(rat(1, 2), rat_int(8), 2, Some(50));
        // n/delta = 1/4: N_1 = ceil(2 * 5^{1/4}) = ceil(2.99) = 3
        assert_eq!(s2.n_levels(1), 3);
    }

    #[test]
    fn depth_one_tree_is_nonempty_with_odd_heights() {
        let t = default_tree(1);
        assert_eq!(t.nodes[t.root].level, 1);
        assert!(t.nodes[t.root].point.q % 2 == 1, "restricted to odd heights at b=1/2");
    }

    #[test]
    fn depth_two_structure_and_validation() {
        let t = default_tree(2);
        assert!(t.nodes.len() > 1);
        // All non-root nodes at level 2 have odd height (threshold eta/4 <
        // 1/2 admits only odd q for b = 1/2... even q has weight 0).
        for n in &t.nodes {
            assert_eq!(n.point.q % 2, 1, "heights must be odd under the b=1/2 restriction");
        }
        let rep = validate_selfsimilar(&t, &rat(13, 12));
        assert!(rep.nesting_ok(), "nesting failures: {:?}", rep.nesting_failures);
        assert!(rep.condition3_ok(), "condition 3 failures: {:?}", rep.condition3_failures);
        assert!(rep.sandwich_ok());
        assert!(rep.sandwich_checked > 0);
        assert!(!rep.node_ratios.is_empty());
        for r in &rep.node_ratios {
            assert!(r.ge_one.is_some(), "ratio interval must be decided");
        }
    }

    #[test]
    fn chains_certify_on_depth_three() {
        let t = default_tree(3);
        for leaf in t.leaves() {
            if t.nodes[leaf].level < 3 {
                continue;
            }
            let rep = chain_certificate(&t, leaf).unwrap();
            assert_eq!(rep.steps.len(), 2);
            for s in &rep.steps {
                assert!(s.sup_bound_ok && s.weight_ok && s.identity_ok);
            }
        }
    }

    #[test]
    fn di_mode_keeps_odd_heights_everywhere() {
        let x0 = QPoint::new(vec![0, 0], 1);
        let sched = Schedule::new(rat(1, 2), rat(1, 4), 2, Some(6));
        let t = build_tree(
            &x0,
            sched,
            Quad::from_rat(rat(1, 2)),
            2,
            TreeMode::DiEps { d: 2 },
            rat_int(1),
            rat_int(1),
            TreeCaps {
                alphas_per_node: Some(4),
                children_per_alpha: Some(3),
                children_per_node: Some(8),
            },
        )
        .unwrap();
        for n in &t.nodes {
            assert_eq!(n.point.q % 2, 1);
        }
        for leaf in t.leaves() {
            if t.nodes[leaf].level == 2 {
                chain_certificate(&t, leaf).unwrap();
            }
        }
    }

    #[test]
    fn single_child_separation_and_leaf_none() {
        let t = default_tree(1);
        // The root is a leaf at depth 1: no children to separate.
        assert!(separation_count(&t, t.root).is_none());
        let t2 = default_tree(2);
        let c = separation_count(&t2, t2.root).expect("root has children");
        assert!(c <= t2.nodes[t2.root].children.len() as u64);
    }

    use crate::exact::rational::rat_int;
}
