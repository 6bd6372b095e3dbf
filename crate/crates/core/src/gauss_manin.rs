//! Gauss–Manin connection of the family `y^2 = 4(x-t1)(x-t2)(x-t3)` in the
//! basis `(dx/y, x dx/y)`, and the vector field `R` it singles out.
//!
//! `∇ (dx/y, x dx/y)^T = A (dx/y, x dx/y)^T` with `A = Σ_i A_i dt_i` and
//!
//! ```text
//! A_i = 1 / (2 (t_i - t_j)(t_i - t_k)) · [ -t_i                    1   ]
//!                                       [ t_j t_k - t_i(t_j + t_k)  t_i ]
//! ```
//!
//! Contracting with the Darboux–Halphen field gives `∇_R (dx/y) = -x dx/y`
//! and `∇_R (x dx/y) = 0`, i.e. the matrix [`R_CONTRACTION`]. Rows are
//! indexed by the basis element being differentiated, columns by the basis
//! element of the result; transposing this convention would transpose the
//! expected matrix.

use crate::dh::{dh_vector_field, DHState};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Matrix2<S> = [[S; 2]; 2];

/// Expected `A(R)` as integers: `[[0, -1], [0, 0]]`.
pub const R_CONTRACTION: [[i64; 2]; 2] = [[0, -1], [0, 0]];

/// The three `dt_i` components of the connection.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionMatrix<S> {
    pub a: [Matrix2<S>; 3],
}

impl<S: Scalar> ConnectionMatrix<S> {
    pub fn trace(&self, i: usize) -> S {
        self.a[i][0][0].clone() + self.a[i][1][1].clone()
    }
}

fn check_distinct<S: Scalar>(t: &[S; 3]) -> Result<()> {
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if (t[i].clone() - t[j].clone()).is_zero() {
            return Err(Error::SingularLocus(i + 1, j + 1));
        }
    }
    Ok(())
}

pub fn gm_matrix<S: Scalar>(t: &DHState<S>) -> Result<ConnectionMatrix<S>> {
    let ts = t.to_array();
    check_distinct(&ts)?;
    let a = std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let (ti, tj, tk) = (ts[i].clone(), ts[j].clone(), ts[k].clone());
        let den = S::from_int(2) * (ti.clone() - tj.clone()) * (ti.clone() - tk.clone());
        let m: Matrix2<S> = [
            [-ti.clone(), S::one()],
            [tj.clone() * tk.clone() - ti.clone() * (tj + tk), ti],
        ];
        m.map(|row| row.map(|x| x / den.clone()))
    });
    Ok(ConnectionMatrix { a })
}

/// `Σ_i v_i A_i(t)`.
pub fn gm_contract<S: Scalar>(t: &DHState<S>, v: &[S; 3]) -> Result<Matrix2<S>> {
    let conn = gm_matrix(t)?;
    let mut out: Matrix2<S> = std::array::from_fn(|_| std::array::from_fn(|_| S::zero()));
    for (vi, ai) in v.iter().zip(&conn.a) {
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = out[r][c].clone() + vi.clone() * ai[r][c].clone();
            }
        }
    }
    Ok(out)
}

/// `A(R) - [[0,-1],[0,0]]` where `R` is the Darboux–Halphen field at `t`.
pub fn verify_r_property<S: Scalar>(t: &DHState<S>) -> Result<Matrix2<S>> {
    let contraction = gm_contract(t, &dh_vector_field(t))?;
    Ok(std::array::from_fn(|r| {
        std::array::from_fn(|c| contraction[r][c].clone() - S::from_int(R_CONTRACTION[r][c]))
    }))
}

pub fn max_abs<S: Scalar>(m: &Matrix2<S>) -> f64 {
    m.iter()
        .flatten()
        .map(Scalar::magnitude)
        .fold(0.0, f64::max)
}
