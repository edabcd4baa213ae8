//! Finite incidence structures: the translation generalized quadrangle
//! `T(O)`, Laguerre planes from an oval cone or from matrix coordinates,
//! derived affine planes, and exhaustive or sampled axiom checks.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::GfSubspace;
use crate::opoly::{oval_points, FuncTable};
use crate::pseudo_oval::{PseudoOval, SteinkeCoordinates};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    /// Blocks are the lines of a generalized quadrangle.
    Gq,
    /// Blocks are circles; `generators` partitions the points.
    Laguerre { generators: Vec<Vec<u32>> },
    AffinePlane,
}

/// Points are `0..num_points`; each block is a sorted list of its points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceStructure {
    pub num_points: usize,
    pub blocks: Vec<Vec<u32>>,
    pub role: Role,
}

/// Fixed-size bitset over points.
#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    #[inline]
    fn get(&self, i: u32) -> bool {
        self.0[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }
    #[inline]
    fn set(&mut self, i: u32) {
        self.0[(i >> 6) as usize] |= 1 << (i & 63);
    }
}

impl IncidenceStructure {
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// For every point, the sorted list of blocks through it.
    pub fn point_blocks(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.num_points];
        for (b, pts) in self.blocks.iter().enumerate() {
            for &p in pts {
                out[p as usize].push(b as u32);
            }
        }
        out
    }

    pub fn is_incident(&self, point: u32, block: usize) -> bool {
        self.blocks[block].binary_search(&point).is_ok()
    }

    /// Flips one incidence: adds `point` to `block` or removes it.
    pub fn toggle(&mut self, point: u32, block: usize) {
        let pts = &mut self.blocks[block];
        match pts.binary_search(&point) {
            Ok(i) => {
                pts.remove(i);
            }
            Err(i) => pts.insert(i, point),
        }
    }

    /// Edge list: a header line, then one `point block` pair per line.
    pub fn write_edge_list(&self, mut w: impl Write) -> Result<()> {
        let role = match &self.role {
            Role::Gq => "gq".to_string(),
            Role::Laguerre { generators } => format!("laguerre generators={}", generators.len()),
            Role::AffinePlane => "affine-plane".to_string(),
        };
        writeln!(w, "# {role} points={} blocks={}", self.num_points, self.blocks.len())?;
        if let Role::Laguerre { generators } = &self.role {
            for (g, pts) in generators.iter().enumerate() {
                let s: Vec<String> = pts.iter().map(u32::to_string).collect();
                writeln!(w, "# generator {g} {}", s.join(" "))?;
            }
        }
        for (b, pts) in self.blocks.iter().enumerate() {
            for p in pts {
                writeln!(w, "{p} {b}")?;
            }
        }
        Ok(())
    }

    pub fn read_edge_list(r: impl BufRead) -> Result<Self> {
        let bad = |m: String| Error::Format(format!("edge list: {m}"));
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| bad("empty".into()))??;
        let words: Vec<&str> = header.trim_start_matches('#').split_whitespace().collect();
        let kv = |key: &str| -> Result<usize> {
            words
                .iter()
                .find_map(|w| w.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
                .ok_or_else(|| bad(format!("missing {key}")))?
                .parse()
                .map_err(|_| bad(format!("bad {key}")))
        };
        let (num_points, num_blocks) = (kv("points")?, kv("blocks")?);
        let mut generators = Vec::new();
        let mut blocks = vec![Vec::new(); num_blocks];
        for line in lines {
            let line = line?;
            if let Some(rest) = line.strip_prefix("# generator ") {
                let pts: Vec<u32> = rest.split_whitespace().skip(1).map(|s| s.parse().map_err(|_| bad(line.clone()))).collect::<Result<_>>()?;
                generators.push(pts);
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace().map(|s| s.parse::<usize>());
            let (Some(Ok(p)), Some(Ok(b))) = (it.next(), it.next()) else { return Err(bad(line)) };
            if p >= num_points || b >= num_blocks {
                return Err(bad(format!("index out of range in '{line}'")));
            }
            blocks[b].push(p as u32);
        }
        for b in blocks.iter_mut() {
            b.sort_unstable();
            b.dedup();
        }
        let role = match words.first() {
            Some(&"gq") => Role::Gq,
            Some(&"laguerre") => Role::Laguerre { generators },
            Some(&"affine-plane") => Role::AffinePlane,
            other => return Err(bad(format!("unknown role {other:?}"))),
        };
        Ok(IncidenceStructure { num_points, blocks, role })
    }
}

/// Packs the bits of `v` at the positions set in `mask` into the low bits.
#[inline]
fn compress(v: u32, mask: u32) -> u32 {
    let (mut out, mut m, mut i) = (0u32, mask, 0);
    while m != 0 {
        let b = m.trailing_zeros();
        out |= (v >> b & 1) << i;
        i += 1;
        m &= m - 1;
    }
    out
}

fn non_pivot_mask(s: &GfSubspace, ambient: u32) -> u32 {
    let pivots = s.basis().iter().fold(0u32, |acc, &b| acc | (b & b.wrapping_neg()));
    ((1u64 << ambient) - 1) as u32 & !pivots
}

/// `T(O)` for a pseudo-oval with nucleus, with `O` in the hyperplane of
/// PG(3n, 2) where the last coordinate vanishes.
///
/// Point ids: affine points `v` (as `3n`-bit words) first, then for each
/// element `X` the `2^n` subspaces `<T(X), v>` off the hyperplane, then `(∞)`.
/// Line ids: for each element `X` the `2^(2n)` subspaces `<X, v>` off the
/// hyperplane, then the elements of `O`.
pub fn build_tgq(o: &PseudoOval) -> Result<IncidenceStructure> {
    let n = o.n;
    let amb = 3 * n;
    let s = 1usize << n;
    let m = o.elements.len();
    let affine = 1usize << amb;
    let tangents = o.tangents()?;
    let tmask: Vec<u32> = tangents.iter().map(|t| non_pivot_mask(t, amb)).collect();
    let xmask: Vec<u32> = o.elements.iter().map(|x| non_pivot_mask(x, amb)).collect();
    let type2 = |i: usize, v: u32| (affine + i * s + compress(tangents[i].reduce(v), tmask[i]) as usize) as u32;
    let infinity = (affine + m * s) as u32;
    let num_points = affine + m * s + 1;

    let mut blocks: Vec<Vec<u32>> = Vec::with_capacity(m * s * s + m);
    for (i, x) in o.elements.iter().enumerate() {
        let vecs = x.vectors();
        let mut lines: Vec<Vec<u32>> = vec![Vec::new(); s * s];
        // each coset of X is listed once, at its reduced representative
        for v in 0..affine as u32 {
            if x.reduce(v) != v {
                continue;
            }
            let idx = compress(v, xmask[i]) as usize;
            let mut pts: Vec<u32> = vecs.iter().map(|&w| v ^ w).collect();
            pts.push(type2(i, v));
            pts.sort_unstable();
            lines[idx] = pts;
        }
        blocks.extend(lines);
    }
    for i in 0..m {
        let mut pts: Vec<u32> = (0..s).map(|c| (affine + i * s + c) as u32).collect();
        pts.push(infinity);
        blocks.push(pts);
    }
    Ok(IncidenceStructure { num_points, blocks, role: Role::Gq })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GqFailure {
    Empty,
    LineSize { line: usize, size: usize, expected: usize },
    PointDegree { point: u32, degree: usize, expected: usize },
    /// Two points on more than one common line.
    TwoLines { x: u32, y: u32 },
    /// `x` not on `line`, and `count` points of the line are collinear with `x` (should be 1).
    Projection { x: u32, line: usize, count: usize },
}

impl fmt::Display for GqFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GqFailure::Empty => write!(f, "no lines"),
            GqFailure::LineSize { line, size, expected } => write!(f, "line {line} has {size} points, expected {expected}"),
            GqFailure::PointDegree { point, degree, expected } => {
                write!(f, "point {point} is on {degree} lines, expected {expected}")
            }
            GqFailure::TwoLines { x, y } => write!(f, "points {x} and {y} share two lines"),
            GqFailure::Projection { x, line, count } => {
                write!(f, "point {x} off line {line} is collinear with {count} of its points")
            }
        }
    }
}

fn gq_degrees(s: &IncidenceStructure) -> std::result::Result<(usize, usize, Vec<Vec<u32>>), GqFailure> {
    let size = s.blocks.first().ok_or(GqFailure::Empty)?.len();
    if let Some((line, b)) = s.blocks.iter().enumerate().find(|(_, b)| b.len() != size) {
        return Err(GqFailure::LineSize { line, size: b.len(), expected: size });
    }
    let pb = s.point_blocks();
    let degree = pb[0].len();
    if let Some((p, b)) = pb.iter().enumerate().find(|(_, b)| b.len() != degree) {
        return Err(GqFailure::PointDegree { point: p as u32, degree: b.len(), expected: degree });
    }
    Ok((size - 1, degree - 1, pb))
}

fn gq_check_point(s: &IncidenceStructure, pb: &[Vec<u32>], x: u32, lines: impl Iterator<Item = usize>) -> Option<GqFailure> {
    let mut col = Bits::new(s.num_points);
    for &l in &pb[x as usize] {
        for &y in &s.blocks[l as usize] {
            if y == x {
                continue;
            }
            if col.get(y) {
                return Some(GqFailure::TwoLines { x, y });
            }
            col.set(y);
        }
    }
    for l in lines {
        let pts = &s.blocks[l];
        if pts.binary_search(&x).is_ok() {
            continue;
        }
        let count = pts.iter().filter(|&&y| col.get(y)).count();
        if count != 1 {
            return Some(GqFailure::Projection { x, line: l, count });
        }
    }
    None
}

/// Exhaustive check of the quadrangle axioms; returns the order `(s, t)`.
pub fn verify_gq(s: &IncidenceStructure) -> std::result::Result<(usize, usize), GqFailure> {
    let (order_s, order_t, pb) = gq_degrees(s)?;
    let fail = (0..s.num_points as u32)
        .into_par_iter()
        .find_map_first(|x| gq_check_point(s, &pb, x, 0..s.blocks.len()));
    match fail {
        Some(w) => Err(w),
        None => Ok((order_s, order_t)),
    }
}

/// Full degree checks plus the projection axiom for `samples` random points
/// (against every line), drawn with a fixed seed.
pub fn verify_gq_sampled(s: &IncidenceStructure, samples: usize, seed: u64) -> std::result::Result<(usize, usize), GqFailure> {
    let (order_s, order_t, pb) = gq_degrees(s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<u32> = (0..samples).map(|_| rng.gen_range(0..s.num_points as u32)).collect();
    let fail = points.par_iter().find_map_first(|&x| gq_check_point(s, &pb, x, 0..s.blocks.len()));
    match fail {
        Some(w) => Err(w),
        None => Ok((order_s, order_t)),
    }
}

/// The cone over `D(f)` in PG(3,q) with vertex `(0,0,0,1)`, minus the vertex.
///
/// Point `(i, λ)` is the `i`-th oval point lifted with last coordinate `λ`,
/// id `i q + λ`; circle `(a,b,c)` is the plane section
/// `{(i, a p0 + b p1 + c p2)}` with id `a q^2 + b q + c`.
pub fn build_laguerre_cone(field: &Field, f: &FuncTable) -> IncidenceStructure {
    let q = field.order();
    let pts = oval_points(field, f);
    let m = |a, b| field.mul(a, b);
    let mut blocks = Vec::with_capacity(q * q * q);
    for a in field.elements() {
        for b in field.elements() {
            for c in field.elements() {
                let circle: Vec<u32> = pts
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i * q) as u32 + (m(a, p[0]) ^ m(b, p[1]) ^ m(c, p[2])) as u32)
                    .collect();
                blocks.push(circle);
            }
        }
    }
    let generators = (0..pts.len()).map(|i| ((i * q) as u32..((i + 1) * q) as u32).collect()).collect();
    IncidenceStructure { num_points: pts.len() * q, blocks, role: Role::Laguerre { generators } }
}

/// The Laguerre plane with circles `K_c = {(z, c D(z))}` for `c ∈ GF(2)^(3n)`,
/// where the columns of `D(z)` span the element `X_z`, and `c D(∞) = c_1`.
///
/// Point `(z, w)` has id `z 2^n + w`, with `∞` stored as `z = 2^n`; circle
/// `c = (c_1, c_2, c_3)` has id `c_1 2^(2n) + c_2 2^n + c_3`.
pub fn build_laguerre_elation(sc: &SteinkeCoordinates) -> IncidenceStructure {
    let n = sc.n;
    let s = 1u32 << n;
    let ht: Vec<_> = sc.h.iter().map(|m| m.transpose()).collect();
    let gt: Vec<_> = sc.g.iter().map(|m| m.transpose()).collect();
    let mut blocks = Vec::with_capacity((s * s * s) as usize);
    for c1 in 0..s {
        for c2 in 0..s {
            for c3 in 0..s {
                let mut circle: Vec<u32> = (0..s).map(|z| z * s + (ht[z as usize].apply(c1) ^ gt[z as usize].apply(c2) ^ c3)).collect();
                circle.push(s * s + c1);
                blocks.push(circle);
            }
        }
    }
    let generators = (0..=s).map(|z| (z * s..(z + 1) * s).collect()).collect();
    IncidenceStructure { num_points: ((s + 1) * s) as usize, blocks, role: Role::Laguerre { generators } }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LaguerreFailure {
    NoGenerators,
    /// The point lies on no generator or on more than one.
    GeneratorPartition { point: u32 },
    /// Generator sizes differ from the first generator's.
    GeneratorSize { generator: usize, size: usize, expected: usize },
    /// The circle does not meet the generator in exactly one point.
    CircleGenerator { circle: usize, generator: usize },
    /// Three pairwise non-parallel points on two circles.
    TwoCircles { points: [u32; 3], circles: [usize; 2] },
    /// Three pairwise non-parallel points on no circle.
    NoCircle { points: [u32; 3] },
}

impl fmt::Display for LaguerreFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LaguerreFailure::NoGenerators => write!(f, "no generators"),
            LaguerreFailure::GeneratorPartition { point } => write!(f, "generators do not partition the points at {point}"),
            LaguerreFailure::GeneratorSize { generator, size, expected } => {
                write!(f, "generator {generator} has {size} points, expected {expected}")
            }
            LaguerreFailure::CircleGenerator { circle, generator } => {
                write!(f, "circle {circle} does not meet generator {generator} exactly once")
            }
            LaguerreFailure::TwoCircles { points, circles } => {
                write!(f, "points {points:?} lie on circles {} and {}", circles[0], circles[1])
            }
            LaguerreFailure::NoCircle { points } => write!(f, "points {points:?} lie on no circle"),
        }
    }
}

/// Maps each point to `(generator, position inside the generator)`.
fn generator_positions(s: &IncidenceStructure) -> std::result::Result<(Vec<(u32, u32)>, usize), LaguerreFailure> {
    let Role::Laguerre { generators } = &s.role else { return Err(LaguerreFailure::NoGenerators) };
    let size = generators.first().ok_or(LaguerreFailure::NoGenerators)?.len();
    let mut pos = vec![(u32::MAX, 0u32); s.num_points];
    for (g, pts) in generators.iter().enumerate() {
        if pts.len() != size {
            return Err(LaguerreFailure::GeneratorSize { generator: g, size: pts.len(), expected: size });
        }
        for (i, &p) in pts.iter().enumerate() {
            if p as usize >= s.num_points || pos[p as usize].0 != u32::MAX {
                return Err(LaguerreFailure::GeneratorPartition { point: p });
            }
            pos[p as usize] = (g as u32, i as u32);
        }
    }
    if let Some(p) = pos.iter().position(|&(g, _)| g == u32::MAX) {
        return Err(LaguerreFailure::GeneratorPartition { point: p as u32 });
    }
    Ok((pos, size))
}

/// Exhaustive check of the Laguerre axioms; returns the order.
///
/// Every circle marks each triple of its points in a table indexed by the
/// three generators and the three positions; each cell must be hit exactly once.
pub fn verify_laguerre(s: &IncidenceStructure) -> std::result::Result<usize, LaguerreFailure> {
    let (pos, order) = generator_positions(s)?;
    let Role::Laguerre { generators } = &s.role else { unreachable!() };
    let ng = generators.len();
    for (c, pts) in s.blocks.iter().enumerate() {
        let mut seen = vec![false; ng];
        for &p in pts {
            let g = pos[p as usize].0 as usize;
            if seen[g] {
                return Err(LaguerreFailure::CircleGenerator { circle: c, generator: g });
            }
            seen[g] = true;
        }
        if let Some(g) = seen.iter().position(|&x| !x) {
            return Err(LaguerreFailure::CircleGenerator { circle: c, generator: g });
        }
    }
    // combination index of generator triples a < b < c
    let mut comb = vec![u32::MAX; ng * ng * ng];
    let mut count = 0u32;
    for a in 0..ng {
        for b in a + 1..ng {
            for c in b + 1..ng {
                comb[(a * ng + b) * ng + c] = count;
                count += 1;
            }
        }
    }
    let o = order as u64;
    let mut owner = vec![u32::MAX; count as usize * order.pow(3)];
    for (c, pts) in s.blocks.iter().enumerate() {
        let mut by_gen: Vec<(u32, u32, u32)> = pts.iter().map(|&p| (pos[p as usize].0, pos[p as usize].1, p)).collect();
        by_gen.sort_unstable();
        for i in 0..by_gen.len() {
            for j in i + 1..by_gen.len() {
                for k in j + 1..by_gen.len() {
                    let (x, y, z) = (by_gen[i], by_gen[j], by_gen[k]);
                    let t = comb[((x.0 as usize) * ng + y.0 as usize) * ng + z.0 as usize] as u64;
                    let cell = (((t * o + x.1 as u64) * o + y.1 as u64) * o + z.1 as u64) as usize;
                    if owner[cell] != u32::MAX {
                        return Err(LaguerreFailure::TwoCircles { points: [x.2, y.2, z.2], circles: [owner[cell] as usize, c] });
                    }
                    owner[cell] = c as u32;
                }
            }
        }
    }
    if let Some(cell) = owner.iter().position(|&c| c == u32::MAX) {
        let mut r = cell as u64;
        let pz = r % o;
        r /= o;
        let py = r % o;
        r /= o;
        let px = r % o;
        let t = (r / o) as u32;
        let idx = comb.iter().position(|&v| v == t).unwrap();
        let (a, b, c) = (idx / (ng * ng), idx / ng % ng, idx % ng);
        let points = [generators[a][px as usize], generators[b][py as usize], generators[c][pz as usize]];
        return Err(LaguerreFailure::NoCircle { points });
    }
    Ok(order)
}

/// Derived affine plane at `point`: points off its generator; lines are the
/// circles through `point` (with `point` removed) and the other generators.
/// Point ids are renumbered in increasing order of the original ids.
pub fn derived_plane(s: &IncidenceStructure, point: u32) -> Result<IncidenceStructure> {
    let Role::Laguerre { generators } = &s.role else {
        return Err(Error::InvariantViolation("derived plane needs a Laguerre plane".into()));
    };
    let own = generators
        .iter()
        .position(|g| g.contains(&point))
        .ok_or_else(|| Error::InvariantViolation(format!("point {point} on no generator")))?;
    let mut new_id = vec![u32::MAX; s.num_points];
    let mut next = 0u32;
    for p in 0..s.num_points {
        if !generators[own].contains(&(p as u32)) {
            new_id[p] = next;
            next += 1;
        }
    }
    let relabel = |pts: &[u32]| -> Vec<u32> {
        let mut v: Vec<u32> = pts.iter().filter(|&&p| new_id[p as usize] != u32::MAX).map(|&p| new_id[p as usize]).collect();
        v.sort_unstable();
        v
    };
    let mut blocks: Vec<Vec<u32>> = s.blocks.iter().filter(|b| b.binary_search(&point).is_ok()).map(|b| relabel(b)).collect();
    blocks.extend(generators.iter().enumerate().filter(|&(g, _)| g != own).map(|(_, pts)| relabel(pts)));
    Ok(IncidenceStructure { num_points: next as usize, blocks, role: Role::AffinePlane })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AffineFailure {
    NotSquare { points: usize },
    LineCount { lines: usize, expected: usize },
    LineSize { line: usize, size: usize },
    TwoLines { x: u32, y: u32, lines: [usize; 2] },
    NoLine { x: u32, y: u32 },
}

impl fmt::Display for AffineFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Checks that every two points lie on exactly one line, with `n^2` points,
/// `n^2 + n` lines of size `n`. Returns the order `n`.
pub fn verify_affine_plane(s: &IncidenceStructure) -> std::result::Result<usize, AffineFailure> {
    let n = (s.num_points as f64).sqrt().round() as usize;
    if n * n != s.num_points || n < 2 {
        return Err(AffineFailure::NotSquare { points: s.num_points });
    }
    if s.blocks.len() != n * n + n {
        return Err(AffineFailure::LineCount { lines: s.blocks.len(), expected: n * n + n });
    }
    let v = s.num_points;
    let mut owner = vec![u32::MAX; v * v];
    for (l, pts) in s.blocks.iter().enumerate() {
        if pts.len() != n {
            return Err(AffineFailure::LineSize { line: l, size: pts.len() });
        }
        for (i, &x) in pts.iter().enumerate() {
            for &y in &pts[i + 1..] {
                let cell = x as usize * v + y as usize;
                if owner[cell] != u32::MAX {
                    return Err(AffineFailure::TwoLines { x, y, lines: [owner[cell] as usize, l] });
                }
                owner[cell] = l as u32;
            }
        }
    }
    for x in 0..v {
        for y in x + 1..v {
            if owner[x * v + y] == u32::MAX {
                return Err(AffineFailure::NoLine { x: x as u32, y: y as u32 });
            }
        }
    }
    Ok(n)
}

/// Isomorphism invariants of a structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub points: usize,
    pub blocks: usize,
    /// Histogram: number of blocks through a point -> number of such points.
    pub point_degrees: BTreeMap<usize, usize>,
    pub block_sizes: BTreeMap<usize, usize>,
    /// Named configuration counts.
    pub counts: BTreeMap<String, u64>,
}

impl Fingerprint {
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("fingerprint serializes");
        format!("{:x}", Sha256::digest(json))
    }
}

/// Degree histograms, plus for quadrangles with at most `regular_pair_limit`
/// points the number of non-collinear point pairs `{x, y}` with
/// `|{x,y}^⊥⊥| = t + 1` (regular pairs).
pub fn fingerprint(s: &IncidenceStructure, regular_pair_limit: usize) -> Fingerprint {
    let pb = s.point_blocks();
    let mut point_degrees = BTreeMap::new();
    for b in &pb {
        *point_degrees.entry(b.len()).or_insert(0) += 1;
    }
    let mut block_sizes = BTreeMap::new();
    for b in &s.blocks {
        *block_sizes.entry(b.len()).or_insert(0) += 1;
    }
    let mut counts = BTreeMap::new();
    if s.role == Role::Gq && s.num_points <= regular_pair_limit {
        if let Ok((_, t, pb)) = gq_degrees(s) {
            counts.insert("regular_pairs".to_string(), regular_pairs(s, &pb, t));
        }
    }
    Fingerprint { points: s.num_points, blocks: s.blocks.len(), point_degrees, block_sizes, counts }
}

fn regular_pairs(s: &IncidenceStructure, pb: &[Vec<u32>], t: usize) -> u64 {
    let np = s.num_points;
    let perp: Vec<Bits> = (0..np)
        .into_par_iter()
        .map(|x| {
            let mut b = Bits::new(np);
            for &l in &pb[x] {
                for &y in &s.blocks[l as usize] {
                    b.set(y);
                }
            }
            b
        })
        .collect();
    let and_list = |a: &Bits, b: &Bits| -> Vec<u32> {
        let mut out = Vec::new();
        for (w, (x, y)) in a.0.iter().zip(&b.0).enumerate() {
            let mut m = x & y;
            while m != 0 {
                out.push((w * 64) as u32 + m.trailing_zeros());
                m &= m - 1;
            }
        }
        out
    };
    (0..np)
        .into_par_iter()
        .map(|x| {
            let mut count = 0u64;
            for y in x + 1..np {
                if perp[x].get(y as u32) {
                    continue;
                }
                let common = and_list(&perp[x], &perp[y]);
                // {x,y}^⊥⊥: points collinear with every point of the common perp
                let mut acc = perp[common[0] as usize].clone();
                for &z in &common[1..] {
                    for (a, b) in acc.0.iter_mut().zip(&perp[z as usize].0) {
                        *a &= b;
                    }
                }
                let size: u32 = acc.0.iter().map(|w| w.count_ones()).sum();
                if size as usize == t + 1 {
                    count += 1;
                }
            }
            count
        })
        .sum()
}
