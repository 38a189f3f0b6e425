use super::{Clause, Lit, VarPool};
use crate::Error;

/// Largest literal count encoded pairwise; larger sets use the ladder.
pub const PAIRWISE_THRESHOLD: usize = 6;

pub fn exactly_one(lits: &[Lit], pool: &mut VarPool) -> Result<Vec<Clause>, Error> {
    exactly_one_with_threshold(lits, pool, PAIRWISE_THRESHOLD)
}

/// Clauses that hold iff exactly one of `lits` is true. Pairwise at-most-one
/// up to `threshold` literals, sequential counter (ladder) above it.
pub fn exactly_one_with_threshold(
    lits: &[Lit],
    pool: &mut VarPool,
    threshold: usize,
) -> Result<Vec<Clause>, Error> {
    if lits.is_empty() {
        return Err(Error::EmptyExactlyOne);
    }
    let mut out = vec![lits.to_vec()];
    if lits.len() <= threshold.max(1) {
        for (i, &a) in lits.iter().enumerate() {
            for &b in &lits[i + 1..] {
                out.push(vec![!a, !b]);
            }
        }
        return Ok(out);
    }
    // s[i] is true once some literal at position <= i is true
    let n = lits.len();
    let s: Vec<Lit> = (0..n - 1).map(|_| pool.new_lit()).collect();
    out.push(vec![!lits[0], s[0]]);
    for i in 1..n - 1 {
        out.push(vec![!lits[i], s[i]]);
        out.push(vec![!s[i - 1], s[i]]);
        out.push(vec![!lits[i], !s[i - 1]]);
    }
    out.push(vec![!lits[n - 1], !s[n - 2]]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Assignment;

    /// Input assignments over the first `n` variables that extend to a model of
    /// `clauses` over all `n_total` variables.
    fn projected_models(clauses: &[Clause], n: usize, n_total: usize) -> Vec<u64> {
        let aux = n_total - n;
        (0..1u64 << n)
            .filter(|&bits| {
                (0..1u64 << aux).any(|ext| {
                    let a = Assignment::from_bits(bits | ext << n, n_total);
                    clauses.iter().all(|c| a.satisfies(c))
                })
            })
            .collect()
    }

    #[test]
    fn single_literal_is_a_unit() {
        let mut pool = VarPool::new();
        let x = pool.new_lit();
        assert_eq!(exactly_one(&[x], &mut pool).unwrap(), vec![vec![x]]);
    }

    #[test]
    fn two_literals_pairwise() {
        let mut pool = VarPool::new();
        let x = pool.new_lit();
        let y = pool.new_lit();
        let cls = exactly_one(&[x, y], &mut pool).unwrap();
        assert_eq!(cls, vec![vec![x, y], vec![!x, !y]]);
    }

    #[test]
    fn empty_is_an_error() {
        let mut pool = VarPool::new();
        assert!(exactly_one(&[], &mut pool).is_err());
    }

    #[test]
    fn three_literals_have_three_one_hot_models() {
        let mut pool = VarPool::new();
        let lits: Vec<Lit> = (0..3).map(|_| pool.new_lit()).collect();
        let cls = exactly_one(&lits, &mut pool).unwrap();
        assert_eq!(projected_models(&cls, 3, pool.n_vars() as usize), vec![1, 2, 4]);
    }

    #[test]
    fn both_encodings_are_exactly_one_up_to_ten_inputs() {
        for n in 1..=10usize {
            for threshold in [0, PAIRWISE_THRESHOLD] {
                let mut pool = VarPool::new();
                let lits: Vec<Lit> = (0..n).map(|_| pool.new_lit()).collect();
                let cls = exactly_one_with_threshold(&lits, &mut pool, threshold).unwrap();
                let models = projected_models(&cls, n, pool.n_vars() as usize);
                let expected: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
                assert_eq!(models, expected, "n={n} threshold={threshold}");
            }
        }
    }
}
