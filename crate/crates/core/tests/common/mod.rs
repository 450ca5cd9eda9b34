//! Shared helpers for the integration suites: deterministic random
//! placements, id relabeling, and brute-force set-partition enumeration.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use vepc_core::model::{EntityKind, Location, Placement};

/// Placeable entities grouped into deployment units: the PGW-embedded PCEF
/// always moves with the PGW.
pub fn placement_units() -> Vec<Vec<EntityKind>> {
    EntityKind::placeable()
        .filter(|&e| e != EntityKind::Pcef)
        .map(|e| {
            if e == EntityKind::Pgw {
                vec![EntityKind::Pgw, EntityKind::Pcef]
            } else {
                vec![e]
            }
        })
        .collect()
}

/// Build a valid placement from explicit segment blocks, one host and LAN
/// per segment.
pub fn placement_from_blocks(name: &str, blocks: &[Vec<EntityKind>]) -> Placement {
    let mut assignments = BTreeMap::new();
    for (i, block) in blocks.iter().enumerate() {
        for &e in block {
            assignments.insert(
                e,
                Location::new(&format!("seg{i}"), &format!("host{i}"), &format!("lan{i}")),
            );
        }
    }
    Placement::new(name, assignments)
}

/// Deterministic random valid placement: a random partition of the
/// deployment units into segments, segments randomly packed onto hosts
/// (hosts may carry several segments), and a random LAN per segment scoped
/// to its host.
pub fn random_placement(rng: &mut ChaCha8Rng, name: &str) -> Placement {
    let units = placement_units();
    let mut segment_of_unit = Vec::with_capacity(units.len());
    let mut num_segments = 0usize;
    for _ in 0..units.len() {
        // Restricted-growth choice: join an existing segment or open a new
        // one.
        let s = rng.gen_range(0..=num_segments);
        if s == num_segments {
            num_segments += 1;
        }
        segment_of_unit.push(s);
    }
    let hosts: Vec<usize> = (0..num_segments)
        .map(|_| rng.gen_range(0..num_segments))
        .collect();
    let lans: Vec<usize> = (0..num_segments).map(|_| rng.gen_range(0..3)).collect();

    let mut assignments = BTreeMap::new();
    for (unit, &seg) in units.iter().zip(&segment_of_unit) {
        let host = hosts[seg];
        for &e in unit {
            assignments.insert(
                e,
                Location::new(
                    &format!("seg{seg}"),
                    &format!("host{host}"),
                    &format!("host{host}-lan{}", lans[seg]),
                ),
            );
        }
    }
    Placement::new(name, assignments)
}

/// Apply a random bijection to every segment, host, and LAN id.
pub fn random_relabel(rng: &mut ChaCha8Rng, placement: &Placement) -> Placement {
    fn bijection<'a>(
        rng: &mut ChaCha8Rng,
        ids: impl Iterator<Item = &'a str>,
        prefix: &str,
    ) -> BTreeMap<String, String> {
        let distinct: std::collections::BTreeSet<&str> = ids.collect();
        let mut fresh: Vec<String> = (0..distinct.len())
            .map(|i| format!("{prefix}{i}"))
            .collect();
        fresh.shuffle(rng);
        distinct
            .into_iter()
            .zip(fresh)
            .map(|(old, new)| (old.to_owned(), new))
            .collect()
    }

    let assignments = placement.assignments();
    let seg_map = bijection(rng, assignments.values().map(|l| l.segment.as_str()), "S");
    let host_map = bijection(rng, assignments.values().map(|l| l.host.as_str()), "H");
    let lan_map = bijection(rng, assignments.values().map(|l| l.lan.as_str()), "L");

    let relabeled = assignments
        .iter()
        .map(|(&e, loc)| {
            (
                e,
                Location::new(
                    &seg_map[&loc.segment],
                    &host_map[&loc.host],
                    &lan_map[&loc.lan],
                ),
            )
        })
        .collect();
    Placement::new(&format!("{}-relabeled", placement.name), relabeled)
}

/// Every partition of `items` into nonempty blocks (Bell-number many).
pub fn set_partitions<T: Clone>(items: &[T]) -> Vec<Vec<Vec<T>>> {
    fn go<T: Clone>(rest: &[T], acc: &mut Vec<Vec<T>>, out: &mut Vec<Vec<Vec<T>>>) {
        match rest.split_first() {
            None => out.push(acc.clone()),
            Some((first, tail)) => {
                for i in 0..acc.len() {
                    acc[i].push(first.clone());
                    go(tail, acc, out);
                    acc[i].pop();
                }
                acc.push(vec![first.clone()]);
                go(tail, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(items, &mut Vec::new(), &mut out);
    out
}

/// Merge two segments of a placement: every member of the second segment
/// moves to the first segment's location.
pub fn merge_segments(placement: &Placement, keep: &str, absorb: &str) -> Placement {
    let target = placement
        .assignments()
        .values()
        .find(|l| l.segment == keep)
        .expect("segment exists")
        .clone();
    let assignments = placement
        .assignments()
        .iter()
        .map(|(&e, loc)| {
            if loc.segment == absorb {
                (e, target.clone())
            } else {
                (e, loc.clone())
            }
        })
        .collect();
    Placement::new(&format!("{}-merged", placement.name), assignments)
}
