//! Canonical encodings of a user's view, used as distribution keys.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{MessageMeta, PieceRef};

/// A compact, comparable encoding of a view.
pub type ViewKey = Vec<u8>;

fn push(out: &mut Vec<u8>, mut v: usize) {
    // LEB128
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

/// Metadata of a packet as seen by a user whose cache holds `cached`.
///
/// Pieces are renamed per file: the user's cached pieces by their rank in
/// the cache, uncached pieces by order of first appearance in the packet,
/// numbered after the cached ones. Two views with the same key differ only
/// by a renaming of uncached pieces.
pub fn canonical_view(cached: &BTreeSet<PieceRef>, messages: &[MessageMeta]) -> ViewKey {
    let mut cached_rank: BTreeMap<PieceRef, usize> = BTreeMap::new();
    let mut per_file: BTreeMap<usize, usize> = BTreeMap::new();
    for r in cached {
        let next = per_file.entry(r.file).or_default();
        cached_rank.insert(*r, *next);
        *next += 1;
    }
    let mut fresh: BTreeMap<PieceRef, usize> = BTreeMap::new();
    let mut fresh_count: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(4 + messages.len() * 16);
    push(&mut out, messages.len());
    for m in messages {
        push(&mut out, m.rows);
        push(&mut out, m.pieces.len());
        for r in &m.pieces {
            let id = match cached_rank.get(r) {
                Some(&rank) => rank,
                None => *fresh.entry(*r).or_insert_with(|| {
                    let n = fresh_count.entry(r.file).or_default();
                    *n += 1;
                    per_file.get(&r.file).copied().unwrap_or(0) + *n - 1
                }),
            };
            push(&mut out, r.file);
            push(&mut out, id);
        }
    }
    out
}

/// Raw metadata with piece indices as transmitted.
pub fn raw_view(messages: &[MessageMeta]) -> ViewKey {
    let mut out = Vec::new();
    push(&mut out, messages.len());
    for m in messages {
        push(&mut out, m.rows);
        push(&mut out, m.pieces.len());
        for r in &m.pieces {
            push(&mut out, r.file);
            push(&mut out, r.piece);
        }
    }
    out
}

/// A low-dimensional summary of a view for the sampled audit: the multiset
/// of message compositions as (file, cached) pairs, how often each transmitted piece
/// recurs per file, and the composition of the first message. Any function
/// of the view has a demand-independent distribution when the view does.
pub fn view_signature(cached: &BTreeSet<PieceRef>, messages: &[MessageMeta]) -> ViewKey {
    let composition = |m: &MessageMeta| {
        let mut c: Vec<(usize, bool)> = m.pieces.iter().map(|r| (r.file, cached.contains(r))).collect();
        c.sort_unstable();
        c
    };
    let mut compositions: Vec<Vec<(usize, bool)>> = messages.iter().map(composition).collect();
    let first = compositions.first().cloned().unwrap_or_default();
    compositions.sort_unstable();

    let mut uses: BTreeMap<PieceRef, usize> = BTreeMap::new();
    for m in messages {
        for r in &m.pieces {
            *uses.entry(*r).or_default() += 1;
        }
    }
    let mut reuse: BTreeMap<usize, Vec<(bool, usize)>> = BTreeMap::new();
    for (r, n) in uses {
        reuse.entry(r.file).or_default().push((cached.contains(&r), n));
    }

    let mut out = Vec::new();
    let push_comp = |out: &mut Vec<u8>, c: &[(usize, bool)]| {
        push(out, c.len());
        for &(f, k) in c {
            push(out, f);
            out.push(k as u8);
        }
    };
    push(&mut out, compositions.len());
    for c in &compositions {
        push_comp(&mut out, c);
    }
    push(&mut out, reuse.len());
    for (file, mut profile) in reuse {
        profile.sort_unstable();
        push(&mut out, file);
        push(&mut out, profile.len());
        for (k, n) in profile {
            out.push(k as u8);
            push(&mut out, n);
        }
    }
    push_comp(&mut out, &first);
    out
}
