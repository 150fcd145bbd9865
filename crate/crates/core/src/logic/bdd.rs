//! Reduced ordered binary decision diagrams.
//!
//! Variables are ordered by index. Nodes live in an arena with a unique
//! table for hash consing and a lossy computed table. Garbage is reclaimed
//! only by an explicit call to [`BddManager::gc`] with the live roots.

const FALSE: u32 = 0;
const TRUE: u32 = 1;
const TERMINAL_VAR: u32 = u32::MAX;
const EMPTY: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bdd(u32);

impl Bdd {
    pub const FALSE: Bdd = Bdd(FALSE);
    pub const TRUE: Bdd = Bdd(TRUE);

    pub fn is_false(self) -> bool {
        self.0 == FALSE
    }

    pub fn is_true(self) -> bool {
        self.0 == TRUE
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    var: u32,
    lo: u32,
    hi: u32,
}

#[derive(Clone, Copy)]
struct CacheEntry {
    op: u32,
    a: u32,
    b: u32,
    c: u32,
    result: u32,
}

const OP_AND: u32 = 1;
const OP_OR: u32 = 2;
const OP_XOR: u32 = 3;
const OP_NOT: u32 = 4;
const OP_EXISTS: u32 = 5;
const OP_AND_EXISTS: u32 = 6;
const OP_RENAME: u32 = 7;

#[inline]
fn mix(op: u32, a: u32, b: u32, c: u32) -> u64 {
    let mut h = (a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    h ^= (b as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    h ^= (c as u64).wrapping_mul(0x1656_67B1_9E37_79F9);
    h ^= op as u64;
    h ^ (h >> 29)
}

pub struct BddManager {
    nodes: Vec<Node>,
    free: Vec<u32>,
    table: Vec<u32>,
    table_len: usize,
    cache: Vec<CacheEntry>,
    renamings: Vec<Vec<u32>>,
    num_vars: u32,
    limit: usize,
    overflow: bool,
    peak: usize,
}

impl BddManager {
    /// Creates a manager for `num_vars` variables holding at most `limit`
    /// live nodes.
    pub fn new(num_vars: usize, limit: usize) -> Self {
        let terminal = Node { var: TERMINAL_VAR, lo: 0, hi: 0 };
        BddManager {
            nodes: vec![terminal, terminal],
            free: Vec::new(),
            table: vec![EMPTY; 1 << 16],
            table_len: 0,
            cache: vec![CacheEntry { op: 0, a: 0, b: 0, c: 0, result: 0 }; 1 << 20],
            renamings: Vec::new(),
            num_vars: num_vars as u32,
            limit,
            overflow: false,
            peak: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars as usize
    }

    /// Number of nodes currently allocated, including garbage not yet
    /// collected.
    pub fn live_nodes(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    pub fn peak_nodes(&self) -> usize {
        self.peak
    }

    /// True once an operation hit the node limit. Results computed after
    /// that point are meaningless.
    pub fn overflowed(&self) -> bool {
        self.overflow
    }

    #[inline]
    fn var_of(&self, u: u32) -> u32 {
        self.nodes[u as usize].var
    }

    #[inline]
    fn slot(&self, var: u32, lo: u32, hi: u32) -> usize {
        (mix(0, var, lo, hi) as usize) & (self.table.len() - 1)
    }

    fn grow_table(&mut self) {
        let size = self.table.len() * 2;
        self.rebuild_table(size);
    }

    fn rebuild_table(&mut self, size: usize) {
        self.table = vec![EMPTY; size];
        self.table_len = 0;
        let mut is_free = vec![false; self.nodes.len()];
        for &f in &self.free {
            is_free[f as usize] = true;
        }
        for i in 2..self.nodes.len() {
            if is_free[i] {
                continue;
            }
            let n = self.nodes[i];
            let mut s = self.slot(n.var, n.lo, n.hi);
            while self.table[s] != EMPTY {
                s = (s + 1) & (self.table.len() - 1);
            }
            self.table[s] = i as u32;
            self.table_len += 1;
        }
    }

    fn mk(&mut self, var: u32, lo: u32, hi: u32) -> u32 {
        if lo == hi {
            return lo;
        }
        let mask = self.table.len() - 1;
        let mut s = self.slot(var, lo, hi);
        loop {
            let e = self.table[s];
            if e == EMPTY {
                break;
            }
            let n = self.nodes[e as usize];
            if n.var == var && n.lo == lo && n.hi == hi {
                return e;
            }
            s = (s + 1) & mask;
        }
        if self.live_nodes() >= self.limit {
            self.overflow = true;
            return FALSE;
        }
        let node = Node { var, lo, hi };
        let id = match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        };
        self.table[s] = id;
        self.table_len += 1;
        self.peak = self.peak.max(self.live_nodes());
        if self.table_len * 2 > self.table.len() {
            self.grow_table();
        }
        id
    }

    #[inline]
    fn cache_get(&self, op: u32, a: u32, b: u32, c: u32) -> Option<u32> {
        let e = &self.cache[(mix(op, a, b, c) as usize) & (self.cache.len() - 1)];
        (e.op == op && e.a == a && e.b == b && e.c == c).then_some(e.result)
    }

    #[inline]
    fn cache_put(&mut self, op: u32, a: u32, b: u32, c: u32, result: u32) {
        let i = (mix(op, a, b, c) as usize) & (self.cache.len() - 1);
        self.cache[i] = CacheEntry { op, a, b, c, result };
    }

    pub fn var(&mut self, v: usize) -> Bdd {
        debug_assert!(v < self.num_vars as usize);
        Bdd(self.mk(v as u32, FALSE, TRUE))
    }

    pub fn nvar(&mut self, v: usize) -> Bdd {
        Bdd(self.mk(v as u32, TRUE, FALSE))
    }

    pub fn literal(&mut self, v: usize, value: bool) -> Bdd {
        if value {
            self.var(v)
        } else {
            self.nvar(v)
        }
    }

    /// Conjunction of the given variables, used as a quantification set.
    pub fn cube(&mut self, vars: &[usize]) -> Bdd {
        let mut sorted: Vec<usize> = vars.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut r = TRUE;
        for &v in sorted.iter().rev() {
            r = self.mk(v as u32, FALSE, r);
        }
        Bdd(r)
    }

    pub fn not(&mut self, a: Bdd) -> Bdd {
        Bdd(self.not_rec(a.0))
    }

    fn not_rec(&mut self, a: u32) -> u32 {
        if a <= TRUE {
            return a ^ 1;
        }
        if let Some(r) = self.cache_get(OP_NOT, a, 0, 0) {
            return r;
        }
        let n = self.nodes[a as usize];
        let lo = self.not_rec(n.lo);
        let hi = self.not_rec(n.hi);
        let r = self.mk(n.var, lo, hi);
        self.cache_put(OP_NOT, a, 0, 0, r);
        r
    }

    pub fn and(&mut self, a: Bdd, b: Bdd) -> Bdd {
        Bdd(self.apply(OP_AND, a.0, b.0))
    }

    pub fn or(&mut self, a: Bdd, b: Bdd) -> Bdd {
        Bdd(self.apply(OP_OR, a.0, b.0))
    }

    pub fn xor(&mut self, a: Bdd, b: Bdd) -> Bdd {
        Bdd(self.apply(OP_XOR, a.0, b.0))
    }

    pub fn iff(&mut self, a: Bdd, b: Bdd) -> Bdd {
        let x = self.apply(OP_XOR, a.0, b.0);
        Bdd(self.not_rec(x))
    }

    pub fn implies(&mut self, a: Bdd, b: Bdd) -> Bdd {
        let na = self.not_rec(a.0);
        Bdd(self.apply(OP_OR, na, b.0))
    }

    pub fn and_not(&mut self, a: Bdd, b: Bdd) -> Bdd {
        let nb = self.not_rec(b.0);
        Bdd(self.apply(OP_AND, a.0, nb))
    }

    pub fn and_all(&mut self, items: impl IntoIterator<Item = Bdd>) -> Bdd {
        let mut acc = Bdd::TRUE;
        for b in items {
            acc = self.and(acc, b);
            if acc.is_false() {
                break;
            }
        }
        acc
    }

    pub fn or_all(&mut self, items: impl IntoIterator<Item = Bdd>) -> Bdd {
        let mut acc = Bdd::FALSE;
        for b in items {
            acc = self.or(acc, b);
            if acc.is_true() {
                break;
            }
        }
        acc
    }

    fn apply(&mut self, op: u32, a: u32, b: u32) -> u32 {
        match op {
            OP_AND => {
                if a == FALSE || b == FALSE {
                    return FALSE;
                }
                if a == TRUE || a == b {
                    return b;
                }
                if b == TRUE {
                    return a;
                }
            }
            OP_OR => {
                if a == TRUE || b == TRUE {
                    return TRUE;
                }
                if a == FALSE || a == b {
                    return b;
                }
                if b == FALSE {
                    return a;
                }
            }
            _ => {
                if a == b {
                    return FALSE;
                }
                if a == FALSE {
                    return b;
                }
                if b == FALSE {
                    return a;
                }
                if a == TRUE {
                    return self.not_rec(b);
                }
                if b == TRUE {
                    return self.not_rec(a);
                }
            }
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if let Some(r) = self.cache_get(op, a, b, 0) {
            return r;
        }
        let na = self.nodes[a as usize];
        let nb = self.nodes[b as usize];
        let var = na.var.min(nb.var);
        let (a0, a1) = if na.var == var { (na.lo, na.hi) } else { (a, a) };
        let (b0, b1) = if nb.var == var { (nb.lo, nb.hi) } else { (b, b) };
        let lo = self.apply(op, a0, b0);
        let hi = self.apply(op, a1, b1);
        let r = self.mk(var, lo, hi);
        self.cache_put(op, a, b, 0, r);
        r
    }

    /// Existential quantification over the variables of `cube`.
    pub fn exists(&mut self, a: Bdd, cube: Bdd) -> Bdd {
        Bdd(self.exists_rec(a.0, cube.0))
    }

    fn exists_rec(&mut self, a: u32, mut cube: u32) -> u32 {
        if a <= TRUE {
            return a;
        }
        let var = self.var_of(a);
        while cube > TRUE && self.var_of(cube) < var {
            cube = self.nodes[cube as usize].hi;
        }
        if cube == TRUE {
            return a;
        }
        if let Some(r) = self.cache_get(OP_EXISTS, a, cube, 0) {
            return r;
        }
        let n = self.nodes[a as usize];
        let r = if self.var_of(cube) == var {
            let next = self.nodes[cube as usize].hi;
            let lo = self.exists_rec(n.lo, next);
            if lo == TRUE {
                TRUE
            } else {
                let hi = self.exists_rec(n.hi, next);
                self.apply(OP_OR, lo, hi)
            }
        } else {
            let lo = self.exists_rec(n.lo, cube);
            let hi = self.exists_rec(n.hi, cube);
            self.mk(var, lo, hi)
        };
        self.cache_put(OP_EXISTS, a, cube, 0, r);
        r
    }

    /// `exists cube. a & b` without building the conjunction.
    pub fn and_exists(&mut self, a: Bdd, b: Bdd, cube: Bdd) -> Bdd {
        Bdd(self.and_exists_rec(a.0, b.0, cube.0))
    }

    fn and_exists_rec(&mut self, a: u32, b: u32, mut cube: u32) -> u32 {
        if a == FALSE || b == FALSE {
            return FALSE;
        }
        if a == TRUE && b == TRUE {
            return TRUE;
        }
        if a == TRUE || a == b {
            return self.exists_rec(b, cube);
        }
        if b == TRUE {
            return self.exists_rec(a, cube);
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let na = self.nodes[a as usize];
        let nb = self.nodes[b as usize];
        let var = na.var.min(nb.var);
        while cube > TRUE && self.var_of(cube) < var {
            cube = self.nodes[cube as usize].hi;
        }
        if cube == TRUE {
            return self.apply(OP_AND, a, b);
        }
        if let Some(r) = self.cache_get(OP_AND_EXISTS, a, b, cube) {
            return r;
        }
        let (a0, a1) = if na.var == var { (na.lo, na.hi) } else { (a, a) };
        let (b0, b1) = if nb.var == var { (nb.lo, nb.hi) } else { (b, b) };
        let r = if self.var_of(cube) == var {
            let next = self.nodes[cube as usize].hi;
            let lo = self.and_exists_rec(a0, b0, next);
            if lo == TRUE {
                TRUE
            } else {
                let hi = self.and_exists_rec(a1, b1, next);
                self.apply(OP_OR, lo, hi)
            }
        } else {
            let lo = self.and_exists_rec(a0, b0, cube);
            let hi = self.and_exists_rec(a1, b1, cube);
            self.mk(var, lo, hi)
        };
        self.cache_put(OP_AND_EXISTS, a, b, cube, r);
        r
    }

    /// Registers a variable substitution for [`BddManager::rename`]. The
    /// map must be strictly increasing on the support of the renamed BDDs.
    pub fn register_renaming(&mut self, map: Vec<usize>) -> usize {
        self.renamings.push(map.into_iter().map(|v| v as u32).collect());
        self.renamings.len() - 1
    }

    pub fn rename(&mut self, a: Bdd, renaming: usize) -> Bdd {
        Bdd(self.rename_rec(a.0, renaming as u32))
    }

    fn rename_rec(&mut self, a: u32, id: u32) -> u32 {
        if a <= TRUE {
            return a;
        }
        if let Some(r) = self.cache_get(OP_RENAME, a, id, 0) {
            return r;
        }
        let n = self.nodes[a as usize];
        let lo = self.rename_rec(n.lo, id);
        let hi = self.rename_rec(n.hi, id);
        let var = self.renamings[id as usize][n.var as usize];
        debug_assert!(lo <= TRUE || self.var_of(lo) > var);
        debug_assert!(hi <= TRUE || self.var_of(hi) > var);
        let r = self.mk(var, lo, hi);
        self.cache_put(OP_RENAME, a, id, 0, r);
        r
    }

    /// Value of `a` under a total assignment.
    pub fn eval(&self, a: Bdd, assignment: impl Fn(usize) -> bool) -> bool {
        let mut u = a.0;
        while u > TRUE {
            let n = self.nodes[u as usize];
            u = if assignment(n.var as usize) { n.hi } else { n.lo };
        }
        u == TRUE
    }

    /// One satisfying path, preferring `false` for every variable. Variables
    /// not on the path are left out and may take any value.
    pub fn sat_one(&self, a: Bdd) -> Option<Vec<(usize, bool)>> {
        if a.is_false() {
            return None;
        }
        let mut path = Vec::new();
        let mut u = a.0;
        while u > TRUE {
            let n = self.nodes[u as usize];
            if n.lo != FALSE {
                path.push((n.var as usize, false));
                u = n.lo;
            } else {
                path.push((n.var as usize, true));
                u = n.hi;
            }
        }
        Some(path)
    }

    /// Number of satisfying assignments over all manager variables.
    pub fn sat_count(&self, a: Bdd) -> f64 {
        let mut memo = std::collections::HashMap::new();
        let n = self.num_vars;
        let top = if a.0 <= TRUE { n } else { self.var_of(a.0) };
        self.count_rec(a.0, &mut memo) * 2f64.powi(top as i32)
    }

    fn count_rec(&self, u: u32, memo: &mut std::collections::HashMap<u32, f64>) -> f64 {
        if u == FALSE {
            return 0.0;
        }
        if u == TRUE {
            return 1.0;
        }
        if let Some(&c) = memo.get(&u) {
            return c;
        }
        let n = self.nodes[u as usize];
        let level = |v: u32| if v <= TRUE { self.num_vars } else { self.var_of(v) };
        let lo = self.count_rec(n.lo, memo) * 2f64.powi((level(n.lo) - n.var - 1) as i32);
        let hi = self.count_rec(n.hi, memo) * 2f64.powi((level(n.hi) - n.var - 1) as i32);
        memo.insert(u, lo + hi);
        lo + hi
    }

    /// Variables the function depends on, in increasing order.
    pub fn support(&self, a: Bdd) -> Vec<usize> {
        let mut seen = std::collections::HashSet::new();
        let mut vars = std::collections::BTreeSet::new();
        let mut stack = vec![a.0];
        while let Some(u) = stack.pop() {
            if u <= TRUE || !seen.insert(u) {
                continue;
            }
            let n = self.nodes[u as usize];
            vars.insert(n.var as usize);
            stack.push(n.lo);
            stack.push(n.hi);
        }
        vars.into_iter().collect()
    }

    /// Number of internal nodes reachable from `a`.
    pub fn node_count(&self, a: Bdd) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![a.0];
        while let Some(u) = stack.pop() {
            if u > TRUE && seen.insert(u) {
                let n = self.nodes[u as usize];
                stack.push(n.lo);
                stack.push(n.hi);
            }
        }
        seen.len()
    }

    /// Frees every node not reachable from `roots` and clears the
    /// computed table.
    pub fn gc(&mut self, roots: &[Bdd]) {
        let mut marked = vec![false; self.nodes.len()];
        marked[0] = true;
        marked[1] = true;
        let mut stack: Vec<u32> = roots.iter().map(|b| b.0).collect();
        while let Some(u) = stack.pop() {
            if marked[u as usize] {
                continue;
            }
            marked[u as usize] = true;
            let n = self.nodes[u as usize];
            stack.push(n.lo);
            stack.push(n.hi);
        }
        self.free.clear();
        for (i, &m) in marked.iter().enumerate().skip(2).rev() {
            if !m {
                self.free.push(i as u32);
            }
        }
        let live = self.live_nodes();
        let mut size = 1 << 16;
        while size < live * 4 {
            size *= 2;
        }
        self.rebuild_table(size);
        for e in self.cache.iter_mut() {
            e.op = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
        (0..1u32 << n).map(move |m| (0..n).map(|i| m & (1 << i) != 0).collect())
    }

    #[test]
    fn boolean_operations_match_truth_tables() {
        let mut m = BddManager::new(3, 1000);
        let (x, y, z) = (m.var(0), m.var(1), m.var(2));
        let xy = m.and(x, y);
        let nz = m.not(z);
        let f = m.or(xy, nz);
        let g = m.iff(x, z);
        for a in all_assignments(3) {
            assert_eq!(m.eval(f, |v| a[v]), (a[0] && a[1]) || !a[2]);
            assert_eq!(m.eval(g, |v| a[v]), a[0] == a[2]);
        }
        assert_eq!(m.sat_count(f), 5.0);
    }

    #[test]
    fn canonicity() {
        let mut m = BddManager::new(2, 1000);
        let (x, y) = (m.var(0), m.var(1));
        let a = m.or(x, y);
        let nx = m.not(x);
        let ny = m.not(y);
        let b = m.and(nx, ny);
        let c = m.not(b);
        assert_eq!(a, c);
    }

    #[test]
    fn quantification_and_relational_product() {
        let mut m = BddManager::new(4, 1000);
        let (a, b, c) = (m.var(0), m.var(1), m.var(2));
        let ab = m.and(a, b);
        let f = m.or(ab, c);
        let cube = m.cube(&[1]);
        let e = m.exists(f, cube);
        let expected = m.or(a, c);
        assert_eq!(e, expected);
        let nb = m.not(b);
        let g = m.or(nb, c);
        let direct = {
            let conj = m.and(f, g);
            m.exists(conj, cube)
        };
        assert_eq!(m.and_exists(f, g, cube), direct);
    }

    #[test]
    fn renaming_and_sat_one() {
        let mut m = BddManager::new(4, 1000);
        let (x0, x2) = (m.var(0), m.var(2));
        let nx2 = m.not(x2);
        let f = m.and(x0, nx2);
        let r = m.register_renaming(vec![1, 1, 3, 3]);
        let g = m.rename(f, r);
        let (y1, y3) = (m.var(1), m.var(3));
        let ny3 = m.not(y3);
        assert_eq!(g, m.and(y1, ny3));
        assert_eq!(m.sat_one(g), Some(vec![(1, true), (3, false)]));
    }

    #[test]
    fn gc_keeps_roots_and_limit_overflows() {
        let mut m = BddManager::new(8, 64);
        let vars: Vec<Bdd> = (0..8).map(|i| m.var(i)).collect();
        let f = m.or_all(vars.clone());
        let before = m.node_count(f);
        m.gc(&[f]);
        assert_eq!(m.node_count(f), before);
        assert_eq!(m.live_nodes(), before + 2);
        let mut tight = BddManager::new(16, 10);
        let mut acc = Bdd::FALSE;
        for i in 0..8 {
            let x = tight.var(i);
            let y = tight.var(15 - i);
            let t = tight.and(x, y);
            acc = tight.or(acc, t);
        }
        let _ = acc;
        assert!(tight.overflowed());
    }
}
