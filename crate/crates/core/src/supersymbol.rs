//! BIA transmission block ("supersymbol") construction and structural verification.
//!
//! With `L` APs and `K` users the block has two parts. Block 1 holds `(L-1)^K` slots in
//! which every user is served; user `k` (0-indexed) reads its preset mode from digit `k`
//! of the slot index written in base `L-1`, so it switches every `(L-1)^k` slots. Block 2
//! holds `K (L-1)^(K-1)` orthogonal slots, one per (user, group), where the owner uses its
//! last mode `L-1`. A resource block of user `k` is the `L-1` Block-1 slots sharing the
//! other users' digits plus the matching Block-2 slot.
//!
//! Slot counts grow as `(L-1)^K`, so lengths are computed with arbitrary precision and
//! only small blocks are materialised.

use std::fmt;
use std::io::{self, Write};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest block [`build_schedule`] will materialise.
pub const MAX_SCHEDULE_SLOTS: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLengths {
    pub block1: BigUint,
    pub block2: BigUint,
    pub total: BigUint,
}

fn check_dims(num_aps: usize, num_users: usize) -> Result<()> {
    if num_users == 0 {
        return Err(Error::invalid("BIA dimensions", "need at least one user"));
    }
    if num_aps == 0 || (num_aps < 2 && num_users >= 2) {
        return Err(Error::TooFewAps { aps: num_aps, users: num_users });
    }
    Ok(())
}

pub fn block_lengths(num_aps: usize, num_users: usize) -> Result<BlockLengths> {
    check_dims(num_aps, num_users)?;
    let base = BigUint::from(num_aps - 1);
    let per_user = base.pow(num_users as u32 - 1);
    let block1 = &per_user * &base;
    let block2 = &per_user * BigUint::from(num_users);
    let total = &block1 + &block2;
    Ok(BlockLengths { block1, block2, total })
}

/// Exact sum-DoF `LK / (L + K - 1)`.
pub fn sum_dof(num_aps: usize, num_users: usize) -> Result<BigRational> {
    if num_aps == 0 || num_users == 0 {
        return Err(Error::invalid("sum-DoF", "L and K must be at least 1"));
    }
    let l = BigUint::from(num_aps);
    let k = BigUint::from(num_users);
    let dof = BigRational::new((&l * &k).into(), (&l + &k - BigUint::one()).into());
    if num_aps >= 2 || num_users == 1 {
        debug_assert_eq!(Some(&dof), dof_from_block(num_aps, num_users).ok().as_ref());
    }
    Ok(dof)
}

/// Sum-DoF counted from the block: `K` users each decode `L (L-1)^(K-1)` symbols over `T`
/// slots.
pub fn dof_from_block(num_aps: usize, num_users: usize) -> Result<BigRational> {
    let lengths = block_lengths(num_aps, num_users)?;
    let symbols =
        BigUint::from(num_users) * BigUint::from(num_aps) * BigUint::from(num_aps - 1).pow(num_users as u32 - 1);
    Ok(BigRational::new(symbols.into(), lengths.total.into()))
}

/// Whether a block of `total_slots` fits inside the channel coherence time (inclusive).
pub fn coherence_feasible(total_slots: &BigUint, slot_duration_s: f64, coherence_time_s: f64) -> Result<bool> {
    if !(slot_duration_s > 0.0 && coherence_time_s > 0.0) {
        return Err(Error::invalid("coherence check", "durations must be positive"));
    }
    let slots = total_slots.to_f64().unwrap_or(f64::INFINITY);
    Ok(slots * slot_duration_s <= coherence_time_s)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceBlock {
    pub owner: usize,
    pub group: usize,
    /// `L - 1` Block-1 slots in mode order, then the Block-2 slot.
    pub slots: Vec<usize>,
    /// Owner's preset mode in each of `slots`.
    pub modes: Vec<usize>,
}

/// Materialised transmission block.
///
/// Mutators exist so that deliberately broken schedules can be fed to
/// [`verify_decodability`]; nothing else in the crate calls them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSchedule {
    num_aps: usize,
    num_users: usize,
    block1_slots: usize,
    block2_slots: usize,
    /// `modes[t][k]`: preset mode of user `k` in slot `t`, `None` when the user idles.
    modes: Vec<Vec<Option<usize>>>,
    served: Vec<Vec<usize>>,
    resource_blocks: Vec<Vec<ResourceBlock>>,
}

impl ModeSchedule {
    pub fn num_aps(&self) -> usize {
        self.num_aps
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn block1_slots(&self) -> usize {
        self.block1_slots
    }

    pub fn block2_slots(&self) -> usize {
        self.block2_slots
    }

    pub fn total_slots(&self) -> usize {
        self.modes.len()
    }

    pub fn mode_of(&self, user: usize, slot: usize) -> Option<usize> {
        self.modes[slot][user]
    }

    pub fn served_in(&self, slot: usize) -> &[usize] {
        &self.served[slot]
    }

    pub fn resource_blocks(&self, user: usize) -> &[ResourceBlock] {
        &self.resource_blocks[user]
    }

    pub fn set_mode(&mut self, slot: usize, user: usize, mode: Option<usize>) {
        self.modes[slot][user] = mode;
    }

    pub fn set_served(&mut self, slot: usize, users: Vec<usize>) {
        self.served[slot] = users;
    }

    /// One line per slot: `slot t | modes m_1 .. m_K | served {ids}`, `-` for idle users.
    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        for t in 0..self.total_slots() {
            let modes: Vec<String> =
                self.modes[t].iter().map(|m| m.map_or_else(|| "-".to_string(), |m| m.to_string())).collect();
            let served: Vec<String> = self.served[t].iter().map(usize::to_string).collect();
            writeln!(out, "slot {t} | modes {} | served {{{}}}", modes.join(" "), served.join(","))?;
        }
        Ok(())
    }
}

pub fn build_schedule(num_aps: usize, num_users: usize) -> Result<ModeSchedule> {
    let lengths = block_lengths(num_aps, num_users)?;
    let total = lengths
        .total
        .to_u64()
        .filter(|&t| t <= MAX_SCHEDULE_SLOTS)
        .ok_or_else(|| Error::ScheduleTooLarge { slots: lengths.total.to_string(), limit: MAX_SCHEDULE_SLOTS })?
        as usize;
    let block1 = lengths.block1.to_usize().expect("bounded by total");
    let block2 = total - block1;
    let base = num_aps - 1;
    let groups = block2 / num_users;
    let stride = |k: usize| base.pow(k as u32);

    let mut modes = vec![vec![None; num_users]; total];
    let mut served = vec![Vec::new(); total];
    for (t, row) in modes.iter_mut().enumerate().take(block1) {
        for (k, mode) in row.iter_mut().enumerate() {
            *mode = Some((t / stride(k)) % base);
        }
        served[t] = (0..num_users).collect();
    }

    let mut resource_blocks = Vec::with_capacity(num_users);
    #[allow(clippy::needless_range_loop)]
    for k in 0..num_users {
        let mut blocks = Vec::with_capacity(groups);
        for g in 0..groups {
            // Spread the group index over the other users' digits, lowest user first.
            let mut rest = g;
            let mut anchor = 0;
            for j in (0..num_users).filter(|&j| j != k) {
                anchor += (rest % base) * stride(j);
                rest /= base;
            }
            let mut slots: Vec<usize> = (0..base).map(|c| anchor + c * stride(k)).collect();
            let b2 = block1 + k * groups + g;
            modes[b2][k] = Some(num_aps - 1);
            served[b2] = vec![k];
            slots.push(b2);
            let rb_modes = (0..num_aps).collect();
            blocks.push(ResourceBlock { owner: k, group: g, slots, modes: rb_modes });
        }
        resource_blocks.push(blocks);
    }

    Ok(ModeSchedule { num_aps, num_users, block1_slots: block1, block2_slots: block2, modes, served, resource_blocks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// (a) the owner visits `L` distinct modes inside each resource block.
    DistinctModes,
    /// (b) every other user keeps one mode across the Block-1 part of a resource block.
    Alignment,
    /// (c) Block-1 slots serve everyone, Block-2 slots serve exactly their owner.
    Orthogonality,
    /// (d) resource blocks of one user share no slot.
    Disjointness,
    /// (e) slot and block counts agree with [`block_lengths`].
    Counts,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::DistinctModes,
        Condition::Alignment,
        Condition::Orthogonality,
        Condition::Disjointness,
        Condition::Counts,
    ];
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::DistinctModes => "distinct-modes",
            Condition::Alignment => "alignment",
            Condition::Orthogonality => "orthogonality",
            Condition::Disjointness => "disjointness",
            Condition::Counts => "counts",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub slot: Option<usize>,
    pub user: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub condition: Condition,
    /// First counterexample found, `None` when the condition holds.
    pub violation: Option<Violation>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub num_aps: usize,
    pub num_users: usize,
    pub checks: Vec<CheckOutcome>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn outcome(&self, condition: Condition) -> &CheckOutcome {
        self.checks.iter().find(|c| c.condition == condition).expect("every condition is checked")
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match &c.violation {
                None => writeln!(f, "L={} K={} {}: pass", self.num_aps, self.num_users, c.condition)?,
                Some(v) => writeln!(
                    f,
                    "L={} K={} {}: FAIL at slot {:?} user {:?}: {}",
                    self.num_aps, self.num_users, c.condition, v.slot, v.user, v.detail
                )?,
            }
        }
        Ok(())
    }
}

fn violation(slot: Option<usize>, user: Option<usize>, detail: impl Into<String>) -> Option<Violation> {
    Some(Violation { slot, user, detail: detail.into() })
}

/// Checks the five structural decodability conditions without any channel values.
pub fn verify_decodability(schedule: &ModeSchedule) -> VerificationReport {
    let checks = vec![
        CheckOutcome { condition: Condition::DistinctModes, violation: check_distinct(schedule) },
        CheckOutcome { condition: Condition::Alignment, violation: check_alignment(schedule) },
        CheckOutcome { condition: Condition::Orthogonality, violation: check_orthogonality(schedule) },
        CheckOutcome { condition: Condition::Disjointness, violation: check_disjoint(schedule) },
        CheckOutcome { condition: Condition::Counts, violation: check_counts(schedule) },
    ];
    VerificationReport { num_aps: schedule.num_aps, num_users: schedule.num_users, checks }
}

fn check_distinct(s: &ModeSchedule) -> Option<Violation> {
    for blocks in &s.resource_blocks {
        for rb in blocks {
            if rb.slots.len() != s.num_aps {
                return violation(
                    rb.slots.first().copied(),
                    Some(rb.owner),
                    format!("resource block {} has {} slots, expected {}", rb.group, rb.slots.len(), s.num_aps),
                );
            }
            let mut seen = vec![false; s.num_aps];
            for &t in &rb.slots {
                match s.modes.get(t).and_then(|row| row[rb.owner]) {
                    Some(m) if m < s.num_aps && !seen[m] => seen[m] = true,
                    Some(m) => {
                        return violation(
                            Some(t),
                            Some(rb.owner),
                            format!("mode {m} repeated or out of range in resource block {}", rb.group),
                        )
                    }
                    None => {
                        return violation(
                            Some(t),
                            Some(rb.owner),
                            format!("owner idle inside resource block {}", rb.group),
                        )
                    }
                }
            }
        }
    }
    None
}

fn check_alignment(s: &ModeSchedule) -> Option<Violation> {
    for blocks in &s.resource_blocks {
        for rb in blocks {
            let block1: Vec<usize> = rb.slots.iter().copied().filter(|&t| t < s.block1_slots).collect();
            let Some(&first) = block1.first() else { continue };
            for j in (0..s.num_users).filter(|&j| j != rb.owner) {
                let reference = s.modes[first][j];
                for &t in &block1[1..] {
                    if s.modes[t][j] != reference {
                        return violation(
                            Some(t),
                            Some(j),
                            format!(
                                "user {j} switches from {:?} to {:?} inside resource block {} of user {}",
                                reference, s.modes[t][j], rb.group, rb.owner
                            ),
                        );
                    }
                }
            }
        }
    }
    None
}

fn check_orthogonality(s: &ModeSchedule) -> Option<Violation> {
    for t in 0..s.block1_slots.min(s.total_slots()) {
        if s.served[t].len() != s.num_users {
            return violation(
                Some(t),
                None,
                format!("Block-1 slot serves {} of {} users", s.served[t].len(), s.num_users),
            );
        }
    }
    for t in s.block1_slots..s.total_slots() {
        if s.served[t].len() != 1 {
            return violation(Some(t), None, format!("Block-2 slot serves {} users", s.served[t].len()));
        }
    }
    for blocks in &s.resource_blocks {
        for rb in blocks {
            for &t in rb.slots.iter().filter(|&&t| t >= s.block1_slots) {
                if s.served.get(t).map(Vec::as_slice) != Some(&[rb.owner][..]) {
                    return violation(Some(t), Some(rb.owner), "Block-2 slot not dedicated to its owner");
                }
            }
        }
    }
    None
}

fn check_disjoint(s: &ModeSchedule) -> Option<Violation> {
    for (k, blocks) in s.resource_blocks.iter().enumerate() {
        let mut owner_of = vec![None; s.total_slots()];
        for rb in blocks {
            for &t in &rb.slots {
                if t >= owner_of.len() {
                    return violation(Some(t), Some(k), "slot index beyond the block");
                }
                if let Some(g) = owner_of[t] {
                    return violation(Some(t), Some(k), format!("resource blocks {g} and {} overlap", rb.group));
                }
                owner_of[t] = Some(rb.group);
            }
        }
    }
    None
}

fn check_counts(s: &ModeSchedule) -> Option<Violation> {
    let lengths = match block_lengths(s.num_aps, s.num_users) {
        Ok(l) => l,
        Err(e) => return violation(None, None, e.to_string()),
    };
    let expect = |v: &BigUint| v.to_usize();
    if expect(&lengths.block1) != Some(s.block1_slots)
        || expect(&lengths.block2) != Some(s.block2_slots)
        || expect(&lengths.total) != Some(s.total_slots())
        || s.block1_slots + s.block2_slots != s.total_slots()
    {
        return violation(
            None,
            None,
            format!(
                "block lengths ({}, {}, {}) differ from ({}, {}, {})",
                s.block1_slots,
                s.block2_slots,
                s.total_slots(),
                lengths.block1,
                lengths.block2,
                lengths.total
            ),
        );
    }
    let groups = if s.num_users == 0 { BigUint::zero() } else { lengths.block2 / BigUint::from(s.num_users) };
    for (k, blocks) in s.resource_blocks.iter().enumerate() {
        if Some(blocks.len()) != groups.to_usize() {
            return violation(None, Some(k), format!("user owns {} resource blocks, expected {groups}", blocks.len()));
        }
        for rb in blocks {
            let in_block1 = rb.slots.iter().filter(|&&t| t < s.block1_slots).count();
            if in_block1 + 1 != s.num_aps || rb.slots.len() != s.num_aps {
                return violation(
                    rb.slots.first().copied(),
                    Some(k),
                    format!(
                        "resource block {} has {in_block1} Block-1 slots and {} in total",
                        rb.group,
                        rb.slots.len()
                    ),
                );
            }
        }
    }
    if s.resource_blocks.len() != s.num_users {
        return violation(None, None, "resource block table does not cover every user");
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Independent slot-count oracle: enumerate every (user, group) resource block and the
    /// Block-1 cartesian product directly, without the closed form.
    fn enumerated_lengths(l: usize, k: usize) -> (usize, usize) {
        let mut block1 = 0;
        let mut digits = vec![0usize; k];
        'outer: loop {
            block1 += 1;
            for d in digits.iter_mut() {
                *d += 1;
                if *d < l - 1 {
                    continue 'outer;
                }
                *d = 0;
            }
            break;
        }
        let groups_per_user = (0..k - 1).fold(1, |acc, _| acc * (l - 1));
        (block1, k * groups_per_user)
    }

    #[test]
    fn small_lengths_match_enumeration() {
        assert_eq!(enumerated_lengths(2, 2), (1, 2));
        assert_eq!(enumerated_lengths(3, 2), (4, 4));
        let bl = block_lengths(2, 2).unwrap();
        assert_eq!((bl.block1, bl.block2, bl.total), (big(1), big(2), big(3)));
        let bl = block_lengths(3, 2).unwrap();
        assert_eq!((bl.block1, bl.block2, bl.total), (big(4), big(4), big(8)));
        for l in 2..6 {
            for k in 1..5 {
                let (b1, b2) = enumerated_lengths(l, k);
                let bl = block_lengths(l, k).unwrap();
                assert_eq!(bl.block1, big(b1 as u64));
                assert_eq!(bl.block2, big(b2 as u64));
            }
        }
    }

    #[test]
    fn sixteen_aps_ten_users() {
        let bl = block_lengths(16, 10).unwrap();
        assert_eq!(bl.block1, big(576_650_390_625));
        assert_eq!(bl.block2, big(384_433_593_750));
        assert_eq!(bl.total, big(961_083_984_375));
    }

    #[test]
    fn lengths_do_not_overflow() {
        let bl = block_lengths(40, 30).unwrap();
        assert_eq!(bl.block1, BigUint::from(39u32).pow(30));
        assert!(bl.total.bits() > 64);
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(block_lengths(1, 2), Err(Error::TooFewAps { .. })));
        assert!(block_lengths(0, 1).is_err());
        assert!(block_lengths(3, 0).is_err());
        assert_eq!(block_lengths(1, 1).unwrap().total, big(1));
    }

    #[test]
    fn canonical_three_slot_block() {
        let s = build_schedule(2, 2).unwrap();
        assert_eq!(s.total_slots(), 3);
        // Hand-built: slot 0 serves both in mode 0; slot 1 is user 0's Block-2 slot (mode 1);
        // slot 2 is user 1's Block-2 slot (mode 1).
        let expected_modes = [[Some(0), Some(0)], [Some(1), None], [None, Some(1)]];
        let expected_served: [&[usize]; 3] = [&[0, 1], &[0], &[1]];
        for (t, row) in expected_modes.iter().enumerate() {
            for (k, &m) in row.iter().enumerate() {
                assert_eq!(s.mode_of(k, t), m, "slot {t} user {k}");
            }
            assert_eq!(s.served_in(t), expected_served[t]);
        }
        assert_eq!(s.resource_blocks(0)[0].slots, vec![0, 1]);
        assert_eq!(s.resource_blocks(1)[0].slots, vec![0, 2]);
        assert_eq!(s.resource_blocks(0)[0].modes, vec![0, 1]);
        assert!(verify_decodability(&s).all_passed());
    }

    #[test]
    fn single_user_degenerate() {
        for l in 1..6 {
            let s = build_schedule(l, 1).unwrap();
            assert_eq!(s.total_slots(), l);
            assert_eq!(s.resource_blocks(0).len(), 1);
            let modes: Vec<_> = (0..l).map(|t| s.mode_of(0, t).unwrap()).collect();
            assert_eq!(modes, (0..l).collect::<Vec<_>>());
            assert!((0..l).all(|t| s.served_in(t) == [0]));
            assert!(verify_decodability(&s).all_passed());
        }
    }

    #[test]
    fn three_by_three_exhaustive() {
        let s = build_schedule(3, 3).unwrap();
        assert_eq!(s.total_slots(), 20);
        for k in 0..3 {
            let rbs = s.resource_blocks(k);
            assert_eq!(rbs.len(), 4);
            let mut used = std::collections::HashSet::new();
            for rb in rbs {
                assert_eq!(rb.slots.len(), 3);
                for &t in &rb.slots {
                    assert!(used.insert(t), "slot {t} reused by user {k}");
                }
            }
        }
    }

    #[test]
    fn switching_cadence() {
        let (l, k) = (4, 3);
        let s = build_schedule(l, k).unwrap();
        for user in 0..k {
            let period = (l - 1).pow(user as u32);
            let mut switches = 0;
            for t in 1..s.block1_slots() {
                if s.mode_of(user, t) != s.mode_of(user, t - 1) {
                    assert_eq!(t % period, 0, "user {user} switched at slot {t}");
                    switches += 1;
                }
            }
            assert_eq!(switches, s.block1_slots() / period - 1);
        }
    }

    #[test]
    fn mode_histogram_in_block1() {
        for (l, k) in [(3, 3), (4, 2), (5, 3)] {
            let s = build_schedule(l, k).unwrap();
            let per_mode = (l - 1).pow(k as u32 - 1);
            for user in 0..k {
                let mut hist = vec![0; l];
                for t in 0..s.block1_slots() {
                    hist[s.mode_of(user, t).unwrap()] += 1;
                }
                assert!(hist[..l - 1].iter().all(|&c| c == per_mode));
                assert_eq!(hist[l - 1], 0);
            }
        }
    }

    #[test]
    fn verifier_passes_grid() {
        for l in 2..=5 {
            for k in 1..=4 {
                let report = verify_decodability(&build_schedule(l, k).unwrap());
                assert!(report.all_passed(), "{report}");
            }
        }
    }

    #[test]
    fn verifier_catches_flipped_mode() {
        let mut s = build_schedule(3, 2).unwrap();
        // Slot 1: user 0 in mode 1, user 1 in mode 0. Flip user 1 so it breaks the group.
        s.set_mode(1, 1, Some(1));
        let r = verify_decodability(&s);
        let out = r.outcome(Condition::Alignment);
        assert!(!out.passed());
        assert_eq!(out.violation.as_ref().unwrap().slot, Some(1));
        assert_eq!(out.violation.as_ref().unwrap().user, Some(1));
    }

    #[test]
    fn verifier_catches_shared_block2_slot() {
        let mut s = build_schedule(2, 2).unwrap();
        s.set_served(1, vec![0, 1]);
        let r = verify_decodability(&s);
        let out = r.outcome(Condition::Orthogonality);
        assert!(!out.passed());
        assert_eq!(out.violation.as_ref().unwrap().slot, Some(1));
        assert!(r.outcome(Condition::Counts).passed());
    }

    #[test]
    fn schedule_too_large_is_refused() {
        assert!(matches!(build_schedule(16, 10), Err(Error::ScheduleTooLarge { .. })));
    }

    #[test]
    fn dof_values() {
        assert_eq!(sum_dof(2, 2).unwrap(), ratio(4, 3));
        assert_eq!(sum_dof(3, 2).unwrap(), ratio(3, 2));
        assert_eq!(dof_from_block(3, 2).unwrap(), ratio(3, 2));
        for l in 1..10 {
            assert_eq!(sum_dof(l, 1).unwrap(), ratio(1, 1));
        }
        assert!(sum_dof(0, 3).is_err());
    }

    #[test]
    fn dof_identity_grid() {
        for l in 2..12 {
            for k in 1..12 {
                assert_eq!(sum_dof(l, k).unwrap(), dof_from_block(l, k).unwrap(), "L={l} K={k}");
            }
        }
    }

    #[test]
    fn coherence() {
        assert!(coherence_feasible(&big(3), 1e-6, 10e-3).unwrap());
        assert!(!coherence_feasible(&big(961_083_984_375), 1e-6, 10e-3).unwrap());
        assert!(coherence_feasible(&big(4), 0.5, 2.0).unwrap());
        assert!(!coherence_feasible(&big(5), 0.5, 2.0).unwrap());
        assert!(coherence_feasible(&big(1), 0.0, 1.0).is_err());
    }

    #[test]
    fn dump_format() {
        let mut buf = Vec::new();
        build_schedule(2, 2).unwrap().write_dump(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "slot 0 | modes 0 0 | served {0,1}\nslot 1 | modes 1 - | served {0}\nslot 2 | modes - 1 | served {1}\n"
        );
    }
}
