//! Exact cover search (Algorithm X) over a sparse row/column incidence.
//!
//! Rows are options, columns are items; a solution picks rows covering every
//! column exactly once. Instead of dancing links the search keeps, per row,
//! the number of already covered columns it touches (`blocked`) and, per
//! column, the number of rows still selectable (`live`). Covering a column
//! blocks all of its rows and decrements `live` of every column those rows
//! touch; uncovering replays the same steps in reverse. Branching always
//! takes the uncovered column with the fewest live rows, lowest index first,
//! and tries its rows in insertion order.

/// Raised when a search exceeds its node budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Aborted;

#[derive(Clone, Debug)]
pub struct ExactCover {
    columns: usize,
    rows: Vec<Vec<u32>>,
    col_rows: Vec<Vec<u32>>,
}

impl ExactCover {
    pub fn new(columns: usize) -> Self {
        ExactCover {
            columns,
            rows: Vec::new(),
            col_rows: vec![Vec::new(); columns],
        }
    }

    /// Adds a row covering `cols` and returns its index.
    pub fn add_row(&mut self, cols: &[u32]) -> usize {
        let idx = self.rows.len();
        let mut cols = cols.to_vec();
        cols.sort_unstable();
        cols.dedup();
        for &c in &cols {
            assert!((c as usize) < self.columns, "column {c} out of range");
            self.col_rows[c as usize].push(idx as u32);
        }
        self.rows.push(cols);
        idx
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn row(&self, idx: usize) -> &[u32] {
        &self.rows[idx]
    }

    pub(crate) fn state(&self) -> State {
        State {
            covered: vec![false; self.columns],
            blocked: vec![0; self.rows.len()],
            live: self.col_rows.iter().map(|r| r.len() as u32).collect(),
            chosen: Vec::new(),
            uncovered: self.columns,
            nodes: 0,
            budget: u64::MAX,
        }
    }

    /// First solution in search order, as sorted row indices.
    pub fn find_first(&self, node_budget: Option<u64>) -> Result<Option<Vec<usize>>, Aborted> {
        let mut st = self.state();
        st.budget = node_budget.unwrap_or(u64::MAX);
        if self.search_first(&mut st)? {
            let mut rows: Vec<usize> = st.chosen.iter().map(|&r| r as usize).collect();
            rows.sort_unstable();
            Ok(Some(rows))
        } else {
            Ok(None)
        }
    }

    fn search_first(&self, st: &mut State) -> Result<bool, Aborted> {
        st.tick()?;
        let Some((col, live)) = st.best_column(self) else {
            return Ok(true);
        };
        if live == 0 {
            return Ok(false);
        }
        for &row in &self.col_rows[col] {
            if st.blocked[row as usize] != 0 {
                continue;
            }
            st.select(self, row);
            if self.search_first(st)? {
                return Ok(true);
            }
            st.deselect(self);
        }
        Ok(false)
    }

    /// Number of solutions.
    pub fn count(&self, node_budget: Option<u64>) -> Result<u128, Aborted> {
        let mut st = self.state();
        st.budget = node_budget.unwrap_or(u64::MAX);
        self.count_from(&mut st)
    }

    pub(crate) fn count_from(&self, st: &mut State) -> Result<u128, Aborted> {
        st.tick()?;
        let Some((col, live)) = st.best_column(self) else {
            return Ok(1);
        };
        if live == 0 {
            return Ok(0);
        }
        let mut total = 0u128;
        for &row in &self.col_rows[col] {
            if st.blocked[row as usize] != 0 {
                continue;
            }
            st.select(self, row);
            total += self.count_from(st)?;
            st.deselect(self);
        }
        Ok(total)
    }

    /// Visits every solution (sorted row indices); stops early when `visit`
    /// returns `false`.
    pub fn for_each_solution(
        &self,
        node_budget: Option<u64>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<(), Aborted> {
        let mut st = self.state();
        st.budget = node_budget.unwrap_or(u64::MAX);
        let mut buf = Vec::new();
        self.enumerate(&mut st, &mut buf, visit)?;
        Ok(())
    }

    fn enumerate(
        &self,
        st: &mut State,
        buf: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<bool, Aborted> {
        st.tick()?;
        let Some((col, live)) = st.best_column(self) else {
            buf.clear();
            buf.extend(st.chosen.iter().map(|&r| r as usize));
            buf.sort_unstable();
            return Ok(visit(buf));
        };
        if live == 0 {
            return Ok(true);
        }
        for &row in &self.col_rows[col] {
            if st.blocked[row as usize] != 0 {
                continue;
            }
            st.select(self, row);
            let go_on = self.enumerate(st, buf, visit)?;
            st.deselect(self);
            if !go_on {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A uniformly random solution, or `None` when there is none.
    ///
    /// Every solution covers the branching column with exactly one of its live
    /// rows, so picking that row with probability proportional to its number
    /// of completions and recursing samples solutions uniformly.
    pub fn sample_uniform(
        &self,
        rng: &mut impl rand::Rng,
        node_budget: Option<u64>,
    ) -> Result<Option<Vec<usize>>, Aborted> {
        let mut st = self.state();
        st.budget = node_budget.unwrap_or(u64::MAX);
        loop {
            let Some((col, live)) = st.best_column(self) else {
                let mut rows: Vec<usize> = st.chosen.iter().map(|&r| r as usize).collect();
                rows.sort_unstable();
                return Ok(Some(rows));
            };
            if live == 0 {
                return Ok(None);
            }
            let mut weights = Vec::new();
            for &row in &self.col_rows[col] {
                if st.blocked[row as usize] != 0 {
                    continue;
                }
                st.select(self, row);
                let w = self.count_from(&mut st)?;
                st.deselect(self);
                if w > 0 {
                    weights.push((row, w));
                }
            }
            let total: u128 = weights.iter().map(|&(_, w)| w).sum();
            if total == 0 {
                return Ok(None);
            }
            let mut pick = rng.gen_range(0..total);
            let &(row, _) = weights
                .iter()
                .find(|&&(_, w)| {
                    if pick < w {
                        true
                    } else {
                        pick -= w;
                        false
                    }
                })
                .expect("pick below total weight");
            st.select(self, row);
        }
    }
}

/// Mutable search state; see the module docs.
pub(crate) struct State {
    pub(crate) covered: Vec<bool>,
    pub(crate) blocked: Vec<u32>,
    pub(crate) live: Vec<u32>,
    pub(crate) chosen: Vec<u32>,
    pub(crate) uncovered: usize,
    nodes: u64,
    budget: u64,
}

impl State {
    fn tick(&mut self) -> Result<(), Aborted> {
        self.nodes += 1;
        if self.nodes > self.budget {
            Err(Aborted)
        } else {
            Ok(())
        }
    }

    /// Uncovered column with the fewest live rows.
    pub(crate) fn best_column(&self, ec: &ExactCover) -> Option<(usize, u32)> {
        if self.uncovered == 0 {
            return None;
        }
        let mut best: Option<(usize, u32)> = None;
        for c in 0..ec.columns {
            if self.covered[c] {
                continue;
            }
            let l = self.live[c];
            if best.is_none_or(|(_, b)| l < b) {
                best = Some((c, l));
                if l == 0 {
                    break;
                }
            }
        }
        best
    }

    pub(crate) fn cover_column(&mut self, ec: &ExactCover, c: usize) {
        debug_assert!(!self.covered[c]);
        self.covered[c] = true;
        self.uncovered -= 1;
        for &r in &ec.col_rows[c] {
            let r = r as usize;
            if self.blocked[r] == 0 {
                for &c2 in &ec.rows[r] {
                    self.live[c2 as usize] -= 1;
                }
            }
            self.blocked[r] += 1;
        }
    }

    pub(crate) fn uncover_column(&mut self, ec: &ExactCover, c: usize) {
        for &r in ec.col_rows[c].iter().rev() {
            let r = r as usize;
            self.blocked[r] -= 1;
            if self.blocked[r] == 0 {
                for &c2 in &ec.rows[r] {
                    self.live[c2 as usize] += 1;
                }
            }
        }
        self.covered[c] = false;
        self.uncovered += 1;
    }

    pub(crate) fn select(&mut self, ec: &ExactCover, row: u32) {
        for &c in &ec.rows[row as usize] {
            self.cover_column(ec, c as usize);
        }
        self.chosen.push(row);
    }

    pub(crate) fn deselect(&mut self, ec: &ExactCover) {
        let row = self.chosen.pop().expect("deselect without selection");
        for &c in ec.rows[row as usize].iter().rev() {
            self.uncover_column(ec, c as usize);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSeed;

    // Knuth's running example: rows 0, 3, 4 form the unique cover.
    fn knuth() -> ExactCover {
        let mut ec = ExactCover::new(7);
        for cols in [
            &[2, 4, 5][..],
            &[0, 3, 6],
            &[1, 2, 5],
            &[0, 3],
            &[1, 6],
            &[3, 4, 6],
        ] {
            ec.add_row(cols);
        }
        ec
    }

    #[test]
    fn knuth_example() {
        let ec = knuth();
        assert_eq!(ec.find_first(None).unwrap(), Some(vec![0, 3, 4]));
        assert_eq!(ec.count(None).unwrap(), 1);
    }

    #[test]
    fn counts_all_partitions() {
        // Rows = all nonempty subsets of 4 columns; covers = set partitions,
        // Bell(4) = 15.
        let mut ec = ExactCover::new(4);
        for mask in 1u32..16 {
            let cols: Vec<u32> = (0..4).filter(|b| mask >> b & 1 == 1).collect();
            ec.add_row(&cols);
        }
        assert_eq!(ec.count(None).unwrap(), 15);
        let mut seen = 0;
        ec.for_each_solution(None, &mut |_| {
            seen += 1;
            true
        })
        .unwrap();
        assert_eq!(seen, 15);
    }

    #[test]
    fn empty_problem_has_one_solution() {
        let ec = ExactCover::new(0);
        assert_eq!(ec.count(None).unwrap(), 1);
        assert_eq!(ec.find_first(None).unwrap(), Some(vec![]));
    }

    #[test]
    fn uncoverable_column() {
        let mut ec = ExactCover::new(2);
        ec.add_row(&[0]);
        assert_eq!(ec.find_first(None).unwrap(), None);
        assert_eq!(ec.count(None).unwrap(), 0);
        assert_eq!(
            ec.sample_uniform(&mut RandomSeed::new(1).rng(), None)
                .unwrap(),
            None
        );
    }

    #[test]
    fn budget_aborts() {
        let mut ec = ExactCover::new(4);
        for mask in 1u32..16 {
            let cols: Vec<u32> = (0..4).filter(|b| mask >> b & 1 == 1).collect();
            ec.add_row(&cols);
        }
        assert_eq!(ec.count(Some(3)), Err(Aborted));
    }

    #[test]
    fn state_restored_after_search() {
        let ec = knuth();
        let mut st = ec.state();
        let before = (st.covered.clone(), st.blocked.clone(), st.live.clone());
        ec.count_from(&mut st).unwrap();
        assert_eq!(
            before,
            (st.covered.clone(), st.blocked.clone(), st.live.clone())
        );
    }

    #[test]
    fn sampling_is_uniform_over_partitions() {
        let mut ec = ExactCover::new(3);
        for mask in 1u32..8 {
            let cols: Vec<u32> = (0..3).filter(|b| mask >> b & 1 == 1).collect();
            ec.add_row(&cols);
        }
        // Bell(3) = 5 partitions.
        let mut rng = RandomSeed::new(12).rng();
        let mut freq = std::collections::BTreeMap::new();
        let trials = 20_000;
        for _ in 0..trials {
            let s = ec.sample_uniform(&mut rng, None).unwrap().unwrap();
            *freq.entry(s).or_insert(0u32) += 1;
        }
        assert_eq!(freq.len(), 5);
        let sigma = (0.2 * 0.8 / trials as f64).sqrt();
        for (_, c) in freq {
            assert!((c as f64 / trials as f64 - 0.2).abs() < 4.0 * sigma);
        }
    }
}
