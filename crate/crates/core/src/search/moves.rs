//! Local-search moves: exact cost deltas and application.
//!
//! Every move is anchored on a pair `(ci, cj)` where `cj` is one of the
//! granular neighbours of `ci`; each kind evaluates the variants that make
//! `ci` and `cj` adjacent (or exchange them) and keeps the cheapest feasible one.

use crate::instance::{Instance, Node, DEPOT};
use crate::solution::Solution;

/// Local-search operator kinds. Level 0 holds the intra- and inter-route
/// operators, level 1 the ejection chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum MoveKind {
    IntraRelocate,
    IntraSwap,
    TwoOpt,
    InterRelocate,
    InterSwap,
    TwoOptStar,
    SinglePathMove,
    DoublePathMove,
    CrossExchange,
    EjectionChainRelocate,
    EjectionChainPath,
}

impl MoveKind {
    pub const ALL: [MoveKind; 11] = [
        MoveKind::IntraRelocate,
        MoveKind::IntraSwap,
        MoveKind::TwoOpt,
        MoveKind::InterRelocate,
        MoveKind::InterSwap,
        MoveKind::TwoOptStar,
        MoveKind::SinglePathMove,
        MoveKind::DoublePathMove,
        MoveKind::CrossExchange,
        MoveKind::EjectionChainRelocate,
        MoveKind::EjectionChainPath,
    ];

    pub fn level(self) -> usize {
        match self {
            MoveKind::EjectionChainRelocate | MoveKind::EjectionChainPath => 1,
            _ => 0,
        }
    }

    /// Operators of one level, in declaration order.
    pub fn of_level(level: usize) -> Vec<MoveKind> {
        Self::ALL.iter().copied().filter(|k| k.level() == level).collect()
    }
}

/// Segment relocation addressed by customer ids: the `len` customers starting
/// at `first` go next to `anchor` (before or after it), optionally reversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Relocation {
    first: Node,
    len: usize,
    reversed: bool,
    anchor: Node,
    before: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Plan {
    Relocate(Relocation),
    Swap { a: Node, b: Node },
    /// Reverse positions `i+1..=j` of `route`; `i` may be -1.
    TwoOpt { route: usize, i: isize, j: usize },
    /// Cut route `ra` after position `i` and `rb` after `j`, reconnect.
    TwoOptStar { ra: usize, i: isize, rb: usize, j: isize, reversed: bool },
    Cross { ra: usize, sa: usize, la: usize, rb: usize, sb: usize, lb: usize },
    Chain { first: Relocation, second: Relocation },
}

/// An evaluated move and its exact cost change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub kind: MoveKind,
    pub delta: i64,
    plan: Plan,
}

impl Move {
    /// Customers whose neighbourhood changes when the move is applied.
    pub fn touched(&self, sol: &Solution) -> Vec<Node> {
        match &self.plan {
            Plan::Relocate(r) => relocation_members(sol, r),
            Plan::Swap { a, b } => vec![*a, *b],
            Plan::TwoOpt { route, i, j } => {
                let seq = sol.route(*route).customers();
                let mut v = vec![seq[*j]];
                if *i + 1 >= 0 {
                    v.push(seq[(*i + 1) as usize]);
                }
                v
            }
            Plan::TwoOptStar { ra, i, rb, j, .. } => {
                let mut v = Vec::new();
                for (r, k) in [(*ra, *i), (*rb, *j)] {
                    let seq = sol.route(r).customers();
                    if k >= 0 {
                        v.push(seq[k as usize]);
                    }
                    if let Some(&c) = seq.get((k + 1) as usize) {
                        v.push(c);
                    }
                }
                v
            }
            Plan::Cross { ra, sa, la, rb, sb, lb } => {
                let a = &sol.route(*ra).customers()[*sa..*sa + *la];
                let b = &sol.route(*rb).customers()[*sb..*sb + *lb];
                a.iter().chain(b).copied().collect()
            }
            Plan::Chain { first, second } => {
                let mut v = relocation_members(sol, first);
                v.push(second.first);
                v
            }
        }
    }
}

fn relocation_members(sol: &Solution, r: &Relocation) -> Vec<Node> {
    let (route, start) = sol.locate(r.first).expect("routed customer");
    let mut v = sol.route(route).customers()[start..start + r.len].to_vec();
    v.push(r.anchor);
    v
}

/// Node at position `p` of a sequence, the depot outside it.
#[inline]
fn at(seq: &[Node], p: isize) -> Node {
    if p < 0 || p as usize >= seq.len() {
        DEPOT
    } else {
        seq[p as usize]
    }
}

#[inline]
fn prefix_load(inst: &Instance, seq: &[Node], upto: isize) -> i64 {
    if upto < 0 {
        0
    } else {
        seq[..=upto as usize].iter().map(|&c| inst.demand(c)).sum()
    }
}

fn keep_best(best: &mut Option<Move>, cand: Move) {
    if best.as_ref().map_or(true, |b| cand.delta < b.delta) {
        *best = Some(cand);
    }
}

/// Relocation delta on explicit sequences. `src` holds the segment at
/// `start..start+len`; `dst` is the destination sequence (the same slice for
/// an intra-route move). Returns `None` when the anchor lies inside the segment.
fn relocation_delta(
    inst: &Instance,
    src: &[Node],
    start: usize,
    len: usize,
    reversed: bool,
    dst: &[Node],
    anchor_pos: usize,
    before: bool,
    same_route: bool,
) -> Option<i64> {
    let d = |a: Node, b: Node| inst.distance(a, b);
    let end = start + len - 1;
    if same_route && (start..=end).contains(&anchor_pos) {
        return None;
    }
    let p = at(src, start as isize - 1);
    let n = at(src, end as isize + 1);
    let (f, l) = (src[start], src[end]);
    let (x, y) = if before {
        let a = anchor_pos as isize;
        (at(dst, a - 1), dst[anchor_pos])
    } else {
        let a = anchor_pos as isize;
        (dst[anchor_pos], at(dst, a + 1))
    };
    // Re-read the insertion edge in the route after removal.
    let (x, y) = if same_route {
        let y = if y == f && x == p { n } else { y };
        let x = if x == l && y == n { p } else { x };
        (x, y)
    } else {
        (x, y)
    };
    let (ff, ll) = if reversed { (l, f) } else { (f, l) };
    let removal = d(p, n) - d(p, f) - d(l, n);
    let insertion = d(x, ff) + d(ll, y) - d(x, y);
    Some(removal + insertion)
}

/// Evaluates the best variant of `kind` for the pair `(ci, cj)`.
///
/// `granular` bounds the neighbour list scanned by the second stage of an
/// ejection chain. Returns `None` when no capacity-feasible variant exists.
pub fn evaluate(
    inst: &Instance,
    sol: &Solution,
    kind: MoveKind,
    ci: Node,
    cj: Node,
    granular: usize,
) -> Option<Move> {
    if ci == cj || ci == DEPOT || cj == DEPOT {
        return None;
    }
    let (ri, pi) = sol.locate(ci)?;
    let (rj, pj) = sol.locate(cj)?;
    let same = ri == rj;
    match kind {
        MoveKind::IntraRelocate if same => relocate_variants(inst, sol, kind, ci, 1, cj),
        MoveKind::InterRelocate if !same => relocate_variants(inst, sol, kind, ci, 1, cj),
        MoveKind::SinglePathMove => relocate_variants(inst, sol, kind, ci, 2, cj),
        MoveKind::DoublePathMove => relocate_variants(inst, sol, kind, ci, 3, cj),
        MoveKind::IntraSwap if same => swap(inst, sol, kind, ci, cj),
        MoveKind::InterSwap if !same => swap(inst, sol, kind, ci, cj),
        MoveKind::TwoOpt if same => two_opt(inst, sol, ri, pi, pj),
        MoveKind::TwoOptStar if !same => two_opt_star(inst, sol, ri, pi, rj, pj),
        MoveKind::CrossExchange if !same => cross(inst, sol, ri, pi, rj, pj),
        MoveKind::EjectionChainRelocate if !same => chain(inst, sol, kind, ci, 1, cj, granular),
        MoveKind::EjectionChainPath if !same => chain(inst, sol, kind, ci, 2, cj, granular),
        _ => None,
    }
}

fn relocate_variants(
    inst: &Instance,
    sol: &Solution,
    kind: MoveKind,
    ci: Node,
    len: usize,
    cj: Node,
) -> Option<Move> {
    let (ri, start) = sol.locate(ci)?;
    let (rj, aj) = sol.locate(cj)?;
    let src = sol.route(ri).customers();
    if start + len > src.len() {
        return None;
    }
    let same = ri == rj;
    if !same {
        let seg_load: i64 = src[start..start + len].iter().map(|&c| inst.demand(c)).sum();
        if sol.route(rj).load() + seg_load > inst.capacity() {
            return None;
        }
    }
    let dst = sol.route(rj).customers();
    let mut best = None;
    let orientations: &[bool] = if len == 1 { &[false] } else { &[false, true] };
    for &before in &[false, true] {
        for &reversed in orientations {
            let Some(delta) = relocation_delta(inst, src, start, len, reversed, dst, aj, before, same)
            else {
                continue;
            };
            keep_best(
                &mut best,
                Move {
                    kind,
                    delta,
                    plan: Plan::Relocate(Relocation {
                        first: ci,
                        len,
                        reversed,
                        anchor: cj,
                        before,
                    }),
                },
            );
        }
    }
    best
}

fn swap(inst: &Instance, sol: &Solution, kind: MoveKind, a: Node, b: Node) -> Option<Move> {
    let d = |x: Node, y: Node| inst.distance(x, y);
    let (ra, _) = sol.locate(a)?;
    let (rb, _) = sol.locate(b)?;
    if ra != rb {
        let (qa, qb) = (inst.demand(a), inst.demand(b));
        let q = inst.capacity();
        if sol.route(ra).load() - qa + qb > q || sol.route(rb).load() - qb + qa > q {
            return None;
        }
    }
    let (pa, na, pb, nb) = (sol.prev(a), sol.next(a), sol.prev(b), sol.next(b));
    let delta = if na == b {
        d(pa, b) + d(a, nb) - d(pa, a) - d(b, nb)
    } else if nb == a {
        d(pb, a) + d(b, na) - d(pb, b) - d(a, na)
    } else {
        d(pa, b) + d(b, na) + d(pb, a) + d(a, nb) - d(pa, a) - d(a, na) - d(pb, b) - d(b, nb)
    };
    Some(Move {
        kind,
        delta,
        plan: Plan::Swap { a, b },
    })
}

fn two_opt(inst: &Instance, sol: &Solution, route: usize, pi: usize, pj: usize) -> Option<Move> {
    let seq = sol.route(route).customers();
    let d = |x: Node, y: Node| inst.distance(x, y);
    let (lo, hi) = (pi.min(pj) as isize, pi.max(pj) as isize);
    let mut best = None;
    // New edge (lo, hi) after cutting behind both, or (lo, hi) after cutting in front of both.
    for (i, j) in [(lo, hi), (lo - 1, hi - 1)] {
        if j - i < 2 || i < -1 {
            continue;
        }
        let delta = d(at(seq, i), at(seq, j)) + d(at(seq, i + 1), at(seq, j + 1))
            - d(at(seq, i), at(seq, i + 1))
            - d(at(seq, j), at(seq, j + 1));
        keep_best(
            &mut best,
            Move {
                kind: MoveKind::TwoOpt,
                delta,
                plan: Plan::TwoOpt {
                    route,
                    i,
                    j: j as usize,
                },
            },
        );
    }
    best
}

fn two_opt_star(
    inst: &Instance,
    sol: &Solution,
    ra: usize,
    pi: usize,
    rb: usize,
    pj: usize,
) -> Option<Move> {
    let a = sol.route(ra).customers();
    let b = sol.route(rb).customers();
    let (la, lb) = (sol.route(ra).load(), sol.route(rb).load());
    let q = inst.capacity();
    let d = |x: Node, y: Node| inst.distance(x, y);
    let (pi, pj) = (pi as isize, pj as isize);
    let mut best = None;
    // Tail exchange: edges (A_i, B_j+1) and (B_j, A_i+1).
    for (i, j) in [(pi, pj - 1), (pi - 1, pj)] {
        let (ha, hb) = (prefix_load(inst, a, i), prefix_load(inst, b, j));
        if ha + (lb - hb) > q || hb + (la - ha) > q {
            continue;
        }
        let delta = d(at(a, i), at(b, j + 1)) + d(at(b, j), at(a, i + 1))
            - d(at(a, i), at(a, i + 1))
            - d(at(b, j), at(b, j + 1));
        keep_best(
            &mut best,
            Move {
                kind: MoveKind::TwoOptStar,
                delta,
                plan: Plan::TwoOptStar { ra, i, rb, j, reversed: false },
            },
        );
    }
    // Head-to-head: edges (A_i, B_j) and (A_i+1, B_j+1).
    for (i, j) in [(pi, pj), (pi - 1, pj - 1)] {
        let (ha, hb) = (prefix_load(inst, a, i), prefix_load(inst, b, j));
        if ha + hb > q || (la - ha) + (lb - hb) > q {
            continue;
        }
        let delta = d(at(a, i), at(b, j)) + d(at(a, i + 1), at(b, j + 1))
            - d(at(a, i), at(a, i + 1))
            - d(at(b, j), at(b, j + 1));
        keep_best(
            &mut best,
            Move {
                kind: MoveKind::TwoOptStar,
                delta,
                plan: Plan::TwoOptStar { ra, i, rb, j, reversed: true },
            },
        );
    }
    best
}

/// Longest segment exchanged by CROSS-exchange.
pub const CROSS_MAX_SEGMENT: usize = 3;

fn cross(inst: &Instance, sol: &Solution, ra: usize, pi: usize, rb: usize, pj: usize) -> Option<Move> {
    let a = sol.route(ra).customers();
    let b = sol.route(rb).customers();
    let q = inst.capacity();
    let d = |x: Node, y: Node| inst.distance(x, y);
    let mut best = None;
    // Segment of A starting at ci placed behind cj, or segment starting at cj placed behind ci.
    let starts = [(pi, pj + 1), (pi + 1, pj)];
    for (sa, sb) in starts {
        for la in 1..=CROSS_MAX_SEGMENT {
            if sa + la > a.len() {
                break;
            }
            let qa: i64 = a[sa..sa + la].iter().map(|&c| inst.demand(c)).sum();
            for lb in 1..=CROSS_MAX_SEGMENT {
                if la == 1 && lb == 1 {
                    continue;
                }
                if sb + lb > b.len() {
                    break;
                }
                let qb: i64 = b[sb..sb + lb].iter().map(|&c| inst.demand(c)).sum();
                if sol.route(ra).load() - qa + qb > q || sol.route(rb).load() - qb + qa > q {
                    continue;
                }
                let (pa, na) = (at(a, sa as isize - 1), at(a, (sa + la) as isize));
                let (pb, nb) = (at(b, sb as isize - 1), at(b, (sb + lb) as isize));
                let (af, al) = (a[sa], a[sa + la - 1]);
                let (bf, bl) = (b[sb], b[sb + lb - 1]);
                let delta = d(pa, bf) + d(bl, na) + d(pb, af) + d(al, nb)
                    - d(pa, af)
                    - d(al, na)
                    - d(pb, bf)
                    - d(bl, nb);
                keep_best(
                    &mut best,
                    Move {
                        kind: MoveKind::CrossExchange,
                        delta,
                        plan: Plan::Cross { ra, sa, la, rb, sb, lb },
                    },
                );
            }
        }
    }
    best
}

/// Two-stage ejection chain. Stage one moves the segment starting at `ci`
/// next to `cj` and overloads `cj`'s route while saving cost; stage two
/// relocates another customer of that route into a third route so that
/// every route is feasible again.
fn chain(
    inst: &Instance,
    sol: &Solution,
    kind: MoveKind,
    ci: Node,
    len: usize,
    cj: Node,
    granular: usize,
) -> Option<Move> {
    let (ra, start) = sol.locate(ci)?;
    let (rb, aj) = sol.locate(cj)?;
    let src = sol.route(ra).customers();
    if start + len > src.len() {
        return None;
    }
    let q = inst.capacity();
    let seg: Vec<Node> = src[start..start + len].to_vec();
    let seg_load: i64 = seg.iter().map(|&c| inst.demand(c)).sum();
    let overflow = sol.route(rb).load() + seg_load - q;
    if overflow <= 0 {
        return None;
    }
    let dst = sol.route(rb).customers();
    let d = |x: Node, y: Node| inst.distance(x, y);
    let orientations: &[bool] = if len == 1 { &[false] } else { &[false, true] };
    let mut best: Option<Move> = None;
    for &before in &[false, true] {
        for &reversed in orientations {
            let Some(d1) = relocation_delta(inst, src, start, len, reversed, dst, aj, before, false)
            else {
                continue;
            };
            if d1 >= 0 {
                continue;
            }
            // The overloaded route after stage one.
            let mut b2 = dst.to_vec();
            let at_pos = if before { aj } else { aj + 1 };
            let mut ins = seg.clone();
            if reversed {
                ins.reverse();
            }
            b2.splice(at_pos..at_pos, ins);
            for (k, &ck) in b2.iter().enumerate() {
                if seg.contains(&ck) || inst.demand(ck) < overflow {
                    continue;
                }
                let (p, n) = (at(&b2, k as isize - 1), at(&b2, k as isize + 1));
                let removal = d(p, n) - d(p, ck) - d(ck, n);
                for &cl in inst.neighbors().list(ck).iter().take(granular) {
                    let Some((rc, pc)) = sol.locate(cl) else { continue };
                    if rc == ra || rc == rb || sol.route(rc).load() + inst.demand(ck) > q {
                        continue;
                    }
                    let c_seq = sol.route(rc).customers();
                    for &before2 in &[false, true] {
                        let (x, y) = if before2 {
                            (at(c_seq, pc as isize - 1), cl)
                        } else {
                            (cl, at(c_seq, pc as isize + 1))
                        };
                        let d2 = removal + d(x, ck) + d(ck, y) - d(x, y);
                        let delta = d1 + d2;
                        if best.as_ref().map_or(true, |b| delta < b.delta) {
                            best = Some(Move {
                                kind,
                                delta,
                                plan: Plan::Chain {
                                    first: Relocation {
                                        first: ci,
                                        len,
                                        reversed,
                                        anchor: cj,
                                        before,
                                    },
                                    second: Relocation {
                                        first: ck,
                                        len: 1,
                                        reversed: false,
                                        anchor: cl,
                                        before: before2,
                                    },
                                },
                            });
                        }
                    }
                }
            }
        }
    }
    best
}

fn apply_relocation(inst: &Instance, sol: &mut Solution, r: &Relocation) {
    let (ra, start) = sol.locate(r.first).expect("segment start is routed");
    let mut src = sol.route(ra).customers().to_vec();
    let mut seg: Vec<Node> = src.drain(start..start + r.len).collect();
    if r.reversed {
        seg.reverse();
    }
    let (rb, _) = sol.locate(r.anchor).expect("anchor is routed");
    if ra == rb {
        let p = src.iter().position(|&c| c == r.anchor).expect("anchor outside segment");
        let at_pos = if r.before { p } else { p + 1 };
        src.splice(at_pos..at_pos, seg);
        sol.set_route(inst, ra, src);
    } else {
        let mut dst = sol.route(rb).customers().to_vec();
        let p = sol.position(r.anchor);
        let at_pos = if r.before { p } else { p + 1 };
        dst.splice(at_pos..at_pos, seg);
        sol.set_route(inst, ra, src);
        sol.set_route(inst, rb, dst);
    }
}

/// Applies a move evaluated on the current state of `sol`.
pub fn apply(inst: &Instance, sol: &mut Solution, mv: &Move) {
    match &mv.plan {
        Plan::Relocate(r) => apply_relocation(inst, sol, r),
        Plan::Swap { a, b } => {
            let (ra, pa) = sol.locate(*a).expect("routed");
            let (rb, pb) = sol.locate(*b).expect("routed");
            if ra == rb {
                let mut seq = sol.route(ra).customers().to_vec();
                seq.swap(pa, pb);
                sol.set_route(inst, ra, seq);
            } else {
                let mut sa = sol.route(ra).customers().to_vec();
                let mut sb = sol.route(rb).customers().to_vec();
                std::mem::swap(&mut sa[pa], &mut sb[pb]);
                sol.set_route(inst, ra, sa);
                sol.set_route(inst, rb, sb);
            }
        }
        Plan::TwoOpt { route, i, j } => {
            let mut seq = sol.route(*route).customers().to_vec();
            seq[(*i + 1) as usize..=*j].reverse();
            sol.set_route(inst, *route, seq);
        }
        Plan::TwoOptStar { ra, i, rb, j, reversed } => {
            let a = sol.route(*ra).customers();
            let b = sol.route(*rb).customers();
            let (ca, cb) = ((*i + 1) as usize, (*j + 1) as usize);
            let (na, nb): (Vec<Node>, Vec<Node>) = if *reversed {
                let mut na = a[..ca].to_vec();
                na.extend(b[..cb].iter().rev());
                let mut nb: Vec<Node> = a[ca..].iter().rev().copied().collect();
                nb.extend_from_slice(&b[cb..]);
                (na, nb)
            } else {
                let mut na = a[..ca].to_vec();
                na.extend_from_slice(&b[cb..]);
                let mut nb = b[..cb].to_vec();
                nb.extend_from_slice(&a[ca..]);
                (na, nb)
            };
            sol.set_route(inst, *ra, na);
            sol.set_route(inst, *rb, nb);
        }
        Plan::Cross { ra, sa, la, rb, sb, lb } => {
            let a = sol.route(*ra).customers();
            let b = sol.route(*rb).customers();
            let mut na = a[..*sa].to_vec();
            na.extend_from_slice(&b[*sb..*sb + *lb]);
            na.extend_from_slice(&a[*sa + *la..]);
            let mut nb = b[..*sb].to_vec();
            nb.extend_from_slice(&a[*sa..*sa + *la]);
            nb.extend_from_slice(&b[*sb + *lb..]);
            sol.set_route(inst, *ra, na);
            sol.set_route(inst, *rb, nb);
        }
        Plan::Chain { first, second } => {
            apply_relocation(inst, sol, first);
            apply_relocation(inst, sol, second);
        }
    }
    sol.drop_empty_routes();
}
