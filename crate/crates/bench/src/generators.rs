use std::fmt;
use std::str::FromStr;

use hytucker::DenseTensor;

/// The two function-related test tensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FunctionKind {
    /// `1 / (i_1 + i_2 + ⋯ + i_d)`
    A,
    /// `1 / (i_1 + 2 i_2 + ⋯ + d i_d)`
    B,
}

impl FunctionKind {
    pub const ALL: [FunctionKind; 2] = [FunctionKind::B, FunctionKind::A];

    /// Value at a 1-based multi-index.
    pub fn value(self, idx: &[usize]) -> f64 {
        let denom: usize = match self {
            FunctionKind::A => idx.iter().sum(),
            FunctionKind::B => idx.iter().enumerate().map(|(k, &i)| (k + 1) * i).sum(),
        };
        1.0 / denom as f64
    }
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionKind::A => "A",
            FunctionKind::B => "B",
        })
    }
}

impl FromStr for FunctionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(FunctionKind::A),
            "B" | "b" => Ok(FunctionKind::B),
            other => Err(format!("unknown tensor kind {other:?} (expected A or B)")),
        }
    }
}

/// Samples the function on the grid `{1..n_1} × ⋯ × {1..n_d}`.
pub fn generate_function_tensor(
    kind: FunctionKind,
    shape: &[usize],
) -> hytucker::Result<DenseTensor> {
    let mut one_based = vec![0usize; shape.len()];
    DenseTensor::from_fn(shape.to_vec(), |idx| {
        for (dst, &i) in one_based.iter_mut().zip(idx) {
            *dst = i + 1;
        }
        kind.value(&one_based)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_values() {
        let a = generate_function_tensor(FunctionKind::A, &[3, 3, 3]).unwrap();
        let b = generate_function_tensor(FunctionKind::B, &[3, 3, 3]).unwrap();
        assert_eq!(a.get(&[0, 0, 0]), 1.0 / 3.0);
        assert_eq!(b.get(&[0, 0, 0]), 1.0 / 6.0);
        assert_eq!(b.get(&[1, 0, 2]), 1.0 / 13.0);
        assert_eq!(a.get(&[2, 1, 0]), 1.0 / 6.0);
    }

    #[test]
    fn symmetry_of_a_but_not_b() {
        let a = generate_function_tensor(FunctionKind::A, &[5, 5, 5]).unwrap();
        let b = generate_function_tensor(FunctionKind::B, &[5, 5, 5]).unwrap();
        let mut b_symmetric = true;
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..5 {
                    for p in [
                        [i, j, k],
                        [j, i, k],
                        [k, j, i],
                        [i, k, j],
                        [j, k, i],
                        [k, i, j],
                    ] {
                        assert_eq!(a.get(&[i, j, k]), a.get(&p));
                        b_symmetric &= b.get(&[i, j, k]) == b.get(&p);
                    }
                }
            }
        }
        assert!(!b_symmetric);
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("A".parse::<FunctionKind>().unwrap(), FunctionKind::A);
        assert_eq!("b".parse::<FunctionKind>().unwrap(), FunctionKind::B);
        assert!("C".parse::<FunctionKind>().is_err());
    }
}
