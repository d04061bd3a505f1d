//! Fixed-order pairwise summation.
//!
//! Every sum in the crate that feeds a reported number goes through one of
//! these routines so that results do not depend on thread count, and so that
//! the sum over a dyadic cube is bitwise equal to the combination of its
//! children's sums.

/// Pairwise sum, splitting at `len / 2`.
pub fn pairwise(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        len => {
            let (a, b) = xs.split_at(len / 2);
            pairwise(a) + pairwise(b)
        }
    }
}

/// Pairwise sum of `f(i)` for `i` in `0..len`.
pub fn pairwise_by(len: usize, f: &impl Fn(usize) -> f64) -> f64 {
    fn go(lo: usize, len: usize, f: &impl Fn(usize) -> f64) -> f64 {
        match len {
            0 => 0.0,
            1 => f(lo),
            _ => {
                let h = len / 2;
                go(lo, h, f) + go(lo + h, len - h, f)
            }
        }
    }
    go(0, len, f)
}

/// Pairwise sum of the cells of an axis-parallel box on a periodic grid with
/// `side` cells per axis. The box is split along its longest axis (lowest
/// axis on ties) until single cells remain.
pub fn box_sum(values: &[f64], side: usize, origin: &[usize], lens: &[usize]) -> f64 {
    debug_assert_eq!(origin.len(), lens.len());
    let mut start = origin.to_vec();
    let mut len = lens.to_vec();
    box_rec(values, side, &mut start, &mut len)
}

fn box_rec(values: &[f64], side: usize, start: &mut [usize], len: &mut [usize]) -> f64 {
    let mut axis = 0;
    for a in 1..len.len() {
        if len[a] > len[axis] {
            axis = a;
        }
    }
    if len[axis] == 0 {
        return 0.0;
    }
    if len[axis] == 1 {
        let idx = start.iter().fold(0, |acc, &c| acc * side + c % side);
        return values[idx];
    }
    let (s0, l0) = (start[axis], len[axis]);
    let h = l0 / 2;
    len[axis] = h;
    let a = box_rec(values, side, start, len);
    start[axis] = s0 + h;
    len[axis] = l0 - h;
    let b = box_rec(values, side, start, len);
    start[axis] = s0;
    len[axis] = l0;
    a + b
}
