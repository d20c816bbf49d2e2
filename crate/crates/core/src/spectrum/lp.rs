//! Exact phase-one simplex for `A x = b, x >= 0`.

use num::{BigRational, Signed, Zero};

/// Some nonnegative solution of `A x = b`, or `None` if there is none.
///
/// Dense tableau with one artificial variable per row, minimizing their sum
/// with Bland's rule (no cycling). All arithmetic is exact.
pub fn feasible_point(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let m = a.len();
    assert_eq!(m, b.len(), "row count mismatch");
    let n = a.first().map_or(0, |row| row.len());
    if m == 0 {
        return Some(vec![BigRational::zero(); n]);
    }
    let width = n + m + 1;
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m + 1);
    for (i, row) in a.iter().enumerate() {
        assert_eq!(row.len(), n, "ragged constraint matrix");
        let flip = b[i].is_negative();
        let mut r = Vec::with_capacity(width);
        r.extend(row.iter().map(|x| if flip { -x } else { x.clone() }));
        r.extend((0..m).map(|j| {
            if j == i {
                BigRational::from_integer(1.into())
            } else {
                BigRational::zero()
            }
        }));
        r.push(if flip { -&b[i] } else { b[i].clone() });
        t.push(r);
    }
    // Objective row: reduced costs of minimizing the artificial sum.
    let mut obj = vec![BigRational::zero(); width];
    for row in &t {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[width - 1] -= &row[width - 1];
    }
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        let Some(enter) = (0..n + m).find(|&j| t[m][j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, best)) => {
                        ratio < *best || (ratio == *best && basis[i] < basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else {
            // Unbounded direction cannot occur for a bounded-below phase-one objective.
            unreachable!("phase-one objective is bounded below by zero");
        };
        pivot(&mut t, row, enter);
        basis[row] = enter;
    }

    if !t[m][width - 1].is_zero() {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[i][width - 1].clone();
        }
    }
    Some(x)
}

fn pivot(t: &mut [Vec<BigRational>], row: usize, col: usize) {
    let p = t[row][col].clone();
    for x in t[row].iter_mut() {
        *x /= &p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let factor = r[col].clone();
        for (x, y) in r.iter_mut().zip(&pivot_row) {
            if !y.is_zero() {
                *x -= &factor * y;
            }
        }
    }
}
