//! Set partitions of `{1..n}`, non-crossing partitions and kernel partitions.
//!
//! Ground-set elements are 1-based throughout, so `{{1,3},{2,4}}` reads the
//! same in code and in output. Partitions are kept in canonical form: blocks
//! sorted by their minimum, elements ascending. Structural equality is
//! therefore partition equality.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MAX_ALL: usize = 12;
pub const MAX_NONCROSSING: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    // labels[p] = index of the block holding element p + 1 (restricted growth string)
    labels: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Validates and canonicalizes a list of 1-based blocks covering `{1..n}`.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::SizeOutOfRange {
                n,
                min: 1,
                max: usize::MAX,
            });
        }
        let mut owner = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &e in block {
                if e == 0 || e > n {
                    return Err(Error::InvalidPartition(format!("element {e} outside 1..={n}")));
                }
                if owner[e - 1] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("element {e} appears twice")));
                }
                owner[e - 1] = b;
            }
        }
        if let Some(p) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::InvalidPartition(format!("element {} not covered", p + 1)));
        }
        Ok(Self::from_labels(&owner))
    }

    /// Partition whose blocks are the level sets of `labels` (positions are 1-based).
    pub fn from_labels<L: PartialEq>(labels: &[L]) -> Self {
        let mut canon = Vec::with_capacity(labels.len());
        let mut reps: Vec<&L> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (p, l) in labels.iter().enumerate() {
            let b = match reps.iter().position(|r| *r == l) {
                Some(b) => b,
                None => {
                    reps.push(l);
                    blocks.push(Vec::new());
                    reps.len() - 1
                }
            };
            canon.push(b);
            blocks[b].push(p + 1);
        }
        Partition { labels: canon, blocks }
    }

    /// The one-block partition `1_n`.
    pub fn one(n: usize) -> Self {
        Self::from_labels(&vec![0usize; n])
    }

    /// The all-singletons partition `0_n`.
    pub fn singletons(n: usize) -> Self {
        Self::from_labels(&(0..n).collect::<Vec<_>>())
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Restricted growth string: `labels()[p]` is the block index of element `p + 1`.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.labels[a - 1] == self.labels[b - 1]
    }

    pub fn is_noncrossing(&self) -> bool {
        is_noncrossing(self)
    }

    /// True when `values[p]` is constant on every block, i.e. `self ≤ ker(values)`.
    pub fn is_constant_on_blocks<V: PartialEq>(&self, values: &[V]) -> bool {
        values.len() == self.n()
            && self
                .blocks
                .iter()
                .all(|b| b.iter().all(|&e| values[e - 1] == values[b[0] - 1]))
    }

    /// Removes `block` and relabels the remaining elements to `1..n-|block|`.
    /// Returns `None` when nothing remains.
    pub fn remove_block(&self, block: &[usize]) -> Option<Partition> {
        let keep: Vec<usize> = (1..=self.n()).filter(|e| !block.contains(e)).collect();
        if keep.is_empty() {
            return None;
        }
        let labels: Vec<usize> = keep.iter().map(|&e| self.labels[e - 1]).collect();
        Some(Self::from_labels(&labels))
    }

    /// Blocks made of consecutive integers, in canonical order.
    pub fn interval_blocks(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.blocks.iter().filter(|b| b.windows(2).all(|w| w[1] == w[0] + 1))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (j, e) in b.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

/// Parses either `1,3;2,4` or the display form `{{1,3},{2,4}}`.
impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let body = if s.starts_with('{') {
            let inner = s
                .strip_prefix("{{")
                .and_then(|t| t.strip_suffix("}}"))
                .ok_or_else(|| Error::InvalidPartition(s.to_string()))?;
            inner.split("},{").collect::<Vec<_>>()
        } else {
            s.split(';').collect()
        };
        let mut blocks = Vec::new();
        for part in body {
            let block = part
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidPartition(format!("{s}: {e}")))?;
            blocks.push(block);
        }
        let n = blocks.iter().map(|b| b.len()).sum();
        Partition::new(n, blocks)
    }
}

fn check_size(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::SizeOutOfRange { n, min: 1, max });
    }
    Ok(())
}

/// Every partition of `{1..n}` in lexicographic restricted-growth order.
pub fn enumerate_all(n: usize) -> Result<Vec<Partition>> {
    check_size(n, MAX_ALL)?;
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    fn rec(pos: usize, max_label: usize, labels: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if pos == labels.len() {
            out.push(Partition::from_labels(labels));
            return;
        }
        for l in 0..=max_label + 1 {
            labels[pos] = l;
            rec(pos + 1, max_label.max(l), labels, out);
        }
    }
    if n == 1 {
        return Ok(vec![Partition::one(1)]);
    }
    rec(1, 0, &mut labels, &mut out);
    Ok(out)
}

/// Calls `visit` on every non-crossing partition of `{1..n}`, in the same
/// order as [`enumerate_all`] would list them.
pub fn for_each_noncrossing(n: usize, mut visit: impl FnMut(&Partition)) -> Result<()> {
    check_size(n, MAX_NONCROSSING)?;
    let mut labels = vec![0usize; n];
    // last[b] = largest element placed in block b so far
    let mut last: Vec<usize> = Vec::with_capacity(n);
    let mut first: Vec<usize> = Vec::with_capacity(n);

    fn joins_without_crossing(labels: &[usize], first: &[usize], last: &[usize], pos: usize, b: usize) -> bool {
        // Joining `pos` to block b crosses iff another block has an element
        // strictly between last[b] and pos and starts before last[b].
        let lb = last[b];
        labels[lb + 1..pos].iter().all(|&c| c == b || first[c] > lb)
    }

    fn rec(
        pos: usize,
        labels: &mut Vec<usize>,
        first: &mut Vec<usize>,
        last: &mut Vec<usize>,
        visit: &mut dyn FnMut(&Partition),
    ) {
        let n = labels.len();
        if pos == n {
            visit(&Partition::from_labels(labels));
            return;
        }
        for b in 0..last.len() {
            if joins_without_crossing(labels, first, last, pos, b) {
                let prev = last[b];
                labels[pos] = b;
                last[b] = pos;
                rec(pos + 1, labels, first, last, visit);
                last[b] = prev;
            }
        }
        labels[pos] = last.len();
        first.push(pos);
        last.push(pos);
        rec(pos + 1, labels, first, last, visit);
        first.pop();
        last.pop();
    }

    first.push(0);
    last.push(0);
    rec(1, &mut labels, &mut first, &mut last, &mut visit);
    Ok(())
}

/// All non-crossing partitions of `{1..n}`; there are Catalan(n) of them.
pub fn enumerate_noncrossing(n: usize) -> Result<Vec<Partition>> {
    let mut out = Vec::new();
    for_each_noncrossing(n, |p| out.push(p.clone()))?;
    Ok(out)
}

/// No `s1 < t1 < s2 < t2` with `s1, s2` in one block and `t1, t2` in another.
pub fn is_noncrossing(p: &Partition) -> bool {
    let l = &p.labels;
    let n = l.len();
    for a in 0..n {
        for b in a + 1..n {
            if l[b] == l[a] {
                continue;
            }
            for c in b + 1..n {
                if l[c] != l[a] {
                    continue;
                }
                if l[c + 1..].iter().any(|&d| d == l[b]) {
                    return false;
                }
            }
        }
    }
    true
}

/// Recursive characterization: some block is an interval and removing it
/// leaves a non-crossing partition.
pub fn is_noncrossing_by_peeling(p: &Partition) -> bool {
    let mut current = p.clone();
    loop {
        let Some(v) = current.interval_blocks().next().cloned() else {
            return false;
        };
        match current.remove_block(&v) {
            None => return true,
            Some(rest) => current = rest,
        }
    }
}

/// Refinement order: every block of `p` lies inside a block of `q`.
pub fn leq(p: &Partition, q: &Partition) -> Result<bool> {
    if p.n() != q.n() {
        return Err(Error::SizeMismatch {
            left: p.n(),
            right: q.n(),
        });
    }
    Ok(p.is_constant_on_blocks(q.labels()))
}

/// `ker i`: positions share a block iff their indices agree.
pub fn kernel<I: PartialEq>(indices: &[I]) -> Result<Partition> {
    if indices.is_empty() {
        return Err(Error::EmptyInput("index tuple"));
    }
    Ok(Partition::from_labels(indices))
}

/// The interval block with the smallest minimum of a non-crossing partition.
pub fn first_interval_block(p: &Partition) -> Result<Vec<usize>> {
    if !is_noncrossing(p) {
        return Err(Error::Crossing(p.to_string()));
    }
    Ok(p.interval_blocks()
        .next()
        .cloned()
        .expect("a non-crossing partition always has an interval block"))
}

pub fn catalan(n: usize) -> u64 {
    // C(n) = binom(2n, n) / (n + 1), computed incrementally to stay exact
    let mut c: u64 = 1;
    for k in 0..n as u64 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

pub fn bell(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            let y = *next.last().unwrap() + x;
            next.push(y);
        }
        row = next;
    }
    row[0]
}
