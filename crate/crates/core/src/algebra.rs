//! Finite groups (and unital semigroups) given by Cayley tables,
//! multipliers, finite measurable spaces and pointwise group actions.
//!
//! Measurable sets are bitmasks over the atoms of a finite Ω with the full
//! power set as σ-field, so countable additivity is finite additivity.

use crate::linalg::{C64, ONE};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("empty or non-square Cayley table")]
    BadShape,
    #[error("table entry {s}*{t} = {value} is out of range")]
    OutOfRange { s: usize, t: usize, value: usize },
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("associativity fails at ({0}, {1}, {2})")]
    AssociativityViolation(usize, usize, usize),
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("multiplier table has wrong shape")]
    MultiplierShape,
    #[error("multiplier not normalized at ({s}, {t}): omega(e,s) = omega(s,e) = 1 required")]
    NormalizationViolation { s: usize, t: usize },
    #[error("multiplier value at ({s}, {t}) is not unimodular")]
    ModulusViolation { s: usize, t: usize },
    #[error("cocycle identity fails at ({s}, {t}, {u}) with residual {residual:e}")]
    CocycleViolation { s: usize, t: usize, u: usize, residual: f64 },
    #[error("measurable space needs 1..={MAX_ATOMS} atoms, got {0}")]
    AtomCount(usize),
    #[error("action table has wrong shape")]
    ActionShape,
    #[error("action maps ({s}, {point}) outside the space")]
    ActionOutOfRange { s: usize, point: usize },
    #[error("identity does not fix point {0}")]
    ActionIdentity(usize),
    #[error("action is not compatible with the product at ({s}, {t}, {point})")]
    ActionComposition { s: usize, t: usize, point: usize },
    #[error("element {0} does not act bijectively")]
    ActionNotBijective(usize),
}

/// Largest supported number of atoms in Ω (sets are 64-bit masks).
pub const MAX_ATOMS: usize = 62;

/// A measurable set: bit `i` marks atom `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AtomSet(pub u64);

impl AtomSet {
    pub const EMPTY: AtomSet = AtomSet(0);

    pub fn full(atoms: usize) -> Self {
        debug_assert!(atoms <= MAX_ATOMS);
        AtomSet((1u64 << atoms) - 1)
    }

    pub fn singleton(atom: usize) -> Self {
        AtomSet(1 << atom)
    }

    pub fn contains(self, atom: usize) -> bool {
        self.0 >> atom & 1 == 1
    }

    pub fn union(self, other: Self) -> Self {
        AtomSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        AtomSet(self.0 & other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Atoms in increasing order.
    pub fn atoms(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = usize>) -> Self {
        AtomSet(atoms.into_iter().fold(0, |acc, i| acc | 1 << i))
    }
}

/// A finite unital semigroup given by its Cayley table, usually a group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<Option<usize>>,
}

fn check_table_shape(table: &[Vec<usize>]) -> Result<usize, AlgebraError> {
    let n = table.len();
    if n == 0 || table.iter().any(|row| row.len() != n) {
        return Err(AlgebraError::BadShape);
    }
    for (s, row) in table.iter().enumerate() {
        if let Some((t, &value)) = row.iter().enumerate().find(|(_, &v)| v >= n) {
            return Err(AlgebraError::OutOfRange { s, t, value });
        }
    }
    Ok(n)
}

/// Validate a unital semigroup table. Elements without inverses are allowed.
pub fn check_semigroup(table: Vec<Vec<usize>>) -> Result<FiniteGroup, AlgebraError> {
    let n = check_table_shape(&table)?;
    let identity =
        (0..n).find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x)).ok_or(AlgebraError::NoIdentity)?;
    for s in 0..n {
        for t in 0..n {
            for u in 0..n {
                if table[table[s][t]][u] != table[s][table[t][u]] {
                    return Err(AlgebraError::AssociativityViolation(s, t, u));
                }
            }
        }
    }
    let inverses = (0..n).map(|s| (0..n).find(|&t| table[s][t] == identity && table[t][s] == identity)).collect();
    Ok(FiniteGroup { table, identity, inverses })
}

/// Validate a group table: identity, associativity, then inverses.
pub fn check_group(table: Vec<Vec<usize>>) -> Result<FiniteGroup, AlgebraError> {
    let g = check_semigroup(table)?;
    match g.inverses.iter().position(Option::is_none) {
        Some(s) => Err(AlgebraError::NoInverse(s)),
        None => Ok(g),
    }
}

impl FiniteGroup {
    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, s: usize, t: usize) -> usize {
        self.table[s][t]
    }

    pub fn inverse(&self, s: usize) -> Option<usize> {
        self.inverses[s]
    }

    /// Inverse of `s`; panics on non-invertible semigroup elements.
    pub fn inv(&self, s: usize) -> usize {
        self.inverses[s].expect("element has no inverse")
    }

    pub fn is_group(&self) -> bool {
        self.inverses.iter().all(Option::is_some)
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// Z_n with element k ↦ k and identity 0.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1);
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        check_group(table).expect("cyclic table is a group")
    }

    /// Symmetric group on `k` letters; element i is the i-th permutation in
    /// lexicographic order and composition is (στ)(x) = σ(τ(x)).
    pub fn symmetric(k: usize) -> Self {
        let perms = permutations(k);
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed");
        let table =
            perms.iter().map(|a| perms.iter().map(|b| index(&b.iter().map(|&x| a[x]).collect())).collect()).collect();
        check_group(table).expect("symmetric table is a group")
    }

    /// The permutation of {0..k} represented by element `s` of `symmetric(k)`.
    pub fn symmetric_permutation(k: usize, s: usize) -> Vec<usize> {
        permutations(k).swap_remove(s)
    }

    /// Direct product with element (a, b) ↦ a * |B| + b.
    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let (na, nb) = (a.order(), b.order());
        let table = (0..na * nb)
            .map(|x| (0..na * nb).map(|y| a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb)).collect())
            .collect();
        check_semigroup(table).expect("product of semigroups")
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for x in 0..k {
            if !prefix.contains(&x) {
                prefix.push(x);
                rec(prefix, k, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), k, &mut out);
    out
}

/// A validated multiplier (2-cocycle) ω on a finite group.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier {
    omega: Vec<Vec<C64>>,
    symmetric: bool,
}

impl Multiplier {
    pub fn trivial(order: usize) -> Self {
        Self { omega: vec![vec![ONE; order]; order], symmetric: true }
    }

    pub fn get(&self, s: usize, t: usize) -> C64 {
        self.omega[s][t]
    }

    pub fn table(&self) -> &[Vec<C64>] {
        &self.omega
    }

    /// ω(s, s⁻¹) = 1 for every invertible s.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_trivial(&self, eps: f64) -> bool {
        self.omega.iter().flatten().all(|z| (z - ONE).norm() <= eps)
    }
}

/// Validate normalization, unit modulus and the cocycle identity over all
/// n³ triples, in that order.
// Indices are group elements; index loops read like the cocycle identities.
#[allow(clippy::needless_range_loop)]
pub fn check_multiplier(group: &FiniteGroup, omega: Vec<Vec<C64>>, eps: f64) -> Result<Multiplier, AlgebraError> {
    let n = group.order();
    if omega.len() != n || omega.iter().any(|row| row.len() != n) {
        return Err(AlgebraError::MultiplierShape);
    }
    let e = group.identity();
    for s in 0..n {
        if (omega[e][s] - ONE).norm() > eps {
            return Err(AlgebraError::NormalizationViolation { s: e, t: s });
        }
        if (omega[s][e] - ONE).norm() > eps {
            return Err(AlgebraError::NormalizationViolation { s, t: e });
        }
    }
    for s in 0..n {
        for t in 0..n {
            if (omega[s][t].norm() - 1.0).abs() > eps {
                return Err(AlgebraError::ModulusViolation { s, t });
            }
        }
    }
    for s in 0..n {
        for t in 0..n {
            for u in 0..n {
                let lhs = omega[s][t] * omega[group.mul(s, t)][u];
                let rhs = omega[s][group.mul(t, u)] * omega[t][u];
                let residual = (lhs - rhs).norm();
                if residual > eps {
                    return Err(AlgebraError::CocycleViolation { s, t, u, residual });
                }
            }
        }
    }
    let symmetric = (0..n).all(|s| match group.inverse(s) {
        Some(si) => (omega[s][si] - ONE).norm() <= eps,
        None => true,
    });
    Ok(Multiplier { omega, symmetric })
}

/// Finite Ω = {0, …, m−1} with Σ = 2^Ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurableSpace {
    atoms: usize,
}

impl MeasurableSpace {
    pub fn new(atoms: usize) -> Result<Self, AlgebraError> {
        if !(1..=MAX_ATOMS).contains(&atoms) {
            return Err(AlgebraError::AtomCount(atoms));
        }
        Ok(Self { atoms })
    }

    pub fn atom_count(&self) -> usize {
        self.atoms
    }

    pub fn full(&self) -> AtomSet {
        AtomSet::full(self.atoms)
    }

    /// Every member of Σ, in bitmask order.
    pub fn subsets(&self) -> impl Iterator<Item = AtomSet> {
        (0..1u64 << self.atoms).map(AtomSet)
    }
}

/// A pointwise action (s, ω) ↦ s·ω of a finite group on the atoms of Ω.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAction {
    space: MeasurableSpace,
    map: Vec<Vec<usize>>,
}

/// Validate an n×m point table against the group and space.
pub fn check_action(
    group: &FiniteGroup,
    space: MeasurableSpace,
    map: Vec<Vec<usize>>,
) -> Result<GroupAction, AlgebraError> {
    let (n, m) = (group.order(), space.atom_count());
    if map.len() != n || map.iter().any(|row| row.len() != m) {
        return Err(AlgebraError::ActionShape);
    }
    for (s, row) in map.iter().enumerate() {
        if let Some(point) = row.iter().position(|&x| x >= m) {
            return Err(AlgebraError::ActionOutOfRange { s, point });
        }
    }
    let e = group.identity();
    if let Some(point) = (0..m).find(|&w| map[e][w] != w) {
        return Err(AlgebraError::ActionIdentity(point));
    }
    for s in 0..n {
        for t in 0..n {
            for w in 0..m {
                if map[group.mul(s, t)][w] != map[s][map[t][w]] {
                    return Err(AlgebraError::ActionComposition { s, t, point: w });
                }
            }
        }
    }
    for (s, row) in map.iter().enumerate() {
        let mut seen = vec![false; m];
        for &x in row {
            seen[x] = true;
        }
        let bijective = seen.iter().all(|&b| b);
        if !bijective && group.inverse(s).is_some() {
            return Err(AlgebraError::ActionNotBijective(s));
        }
    }
    Ok(GroupAction { space, map })
}

impl GroupAction {
    /// Ω = G acted on by left multiplication.
    pub fn left_translation(group: &FiniteGroup) -> Self {
        let space = MeasurableSpace::new(group.order()).expect("group order within atom cap");
        let map = group.table().to_vec();
        check_action(group, space, map).expect("left translation is an action")
    }

    /// Every element fixes every atom.
    pub fn trivial(group: &FiniteGroup, space: MeasurableSpace) -> Self {
        let map = vec![(0..space.atom_count()).collect(); group.order()];
        check_action(group, space, map).expect("trivial action")
    }

    pub fn space(&self) -> MeasurableSpace {
        self.space
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.map
    }

    pub fn act_point(&self, s: usize, atom: usize) -> usize {
        self.map[s][atom]
    }

    /// Image sE = {s·ω : ω ∈ E}.
    pub fn act_on_set(&self, s: usize, set: AtomSet) -> AtomSet {
        AtomSet::from_atoms(set.atoms().map(|w| self.map[s][w]))
    }

    /// Atoms of both actions side by side; the second block is shifted.
    pub fn disjoint_union(&self, other: &GroupAction, group: &FiniteGroup) -> Result<Self, AlgebraError> {
        let m1 = self.space.atom_count();
        let space = MeasurableSpace::new(m1 + other.space.atom_count())?;
        let map = self
            .map
            .iter()
            .zip(&other.map)
            .map(|(a, b)| a.iter().copied().chain(b.iter().map(|&x| x + m1)).collect())
            .collect();
        check_action(group, space, map)
    }
}
