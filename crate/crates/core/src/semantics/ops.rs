//! Denotations of the primitive operations.

use thiserror::Error;

use crate::syntax::{Const, Op};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpError {
    /// Outside the operation's domain (division by zero, wrong base type).
    #[error("`{op}` undefined on {args}")]
    Undefined { op: Op, args: String },
    /// 64-bit overflow; reported as a fault rather than blame.
    #[error("integer overflow in `{op}` on {args}")]
    Overflow { op: Op, args: String },
}

fn show(args: &[Const]) -> String {
    args.iter().map(Const::to_string).collect::<Vec<_>>().join(", ")
}

/// Applies `op` to constant arguments. `mod` and `div` are Euclidean, so
/// `-1 mod 2 = 1`.
pub fn apply_op(op: Op, args: &[Const]) -> Result<Const, OpError> {
    let undefined = || OpError::Undefined { op, args: show(args) };
    let overflow = || OpError::Overflow { op, args: show(args) };
    let int = |n: Option<i64>| n.map(Const::Int).ok_or_else(overflow);
    match (op, args) {
        (Op::Not, [Const::Bool(b)]) => Ok(Const::Bool(!b)),
        (Op::And, [Const::Bool(a), Const::Bool(b)]) => Ok(Const::Bool(*a && *b)),
        (Op::Or, [Const::Bool(a), Const::Bool(b)]) => Ok(Const::Bool(*a || *b)),
        (Op::Eq, [Const::Int(a), Const::Int(b)]) => Ok(Const::Bool(a == b)),
        (Op::Neq, [Const::Int(a), Const::Int(b)]) => Ok(Const::Bool(a != b)),
        (Op::Lt, [Const::Int(a), Const::Int(b)]) => Ok(Const::Bool(a < b)),
        (Op::Le, [Const::Int(a), Const::Int(b)]) => Ok(Const::Bool(a <= b)),
        (Op::Gt, [Const::Int(a), Const::Int(b)]) => Ok(Const::Bool(a > b)),
        (Op::Ge, [Const::Int(a), Const::Int(b)]) => Ok(Const::Bool(a >= b)),
        (Op::Add, [Const::Int(a), Const::Int(b)]) => int(a.checked_add(*b)),
        (Op::Sub, [Const::Int(a), Const::Int(b)]) => int(a.checked_sub(*b)),
        (Op::Mul, [Const::Int(a), Const::Int(b)]) => int(a.checked_mul(*b)),
        (Op::Mod | Op::Div, [Const::Int(_), Const::Int(0)]) => Err(undefined()),
        (Op::Mod, [Const::Int(a), Const::Int(b)]) => int(a.checked_rem_euclid(*b)),
        (Op::Div, [Const::Int(a), Const::Int(b)]) => int(a.checked_div_euclid(*b)),
        _ => Err(undefined()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_mod_is_euclidean() {
        assert_eq!(apply_op(Op::Mod, &[Const::Int(-1), Const::Int(2)]), Ok(Const::Int(1)));
        assert_eq!(apply_op(Op::Div, &[Const::Int(-1), Const::Int(2)]), Ok(Const::Int(-1)));
    }

    #[test]
    fn equality_and_division_by_zero() {
        assert_eq!(apply_op(Op::Eq, &[Const::Int(0), Const::Int(0)]), Ok(Const::Bool(true)));
        assert!(matches!(
            apply_op(Op::Div, &[Const::Int(4), Const::Int(0)]),
            Err(OpError::Undefined { .. })
        ));
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(
            apply_op(Op::Add, &[Const::Int(i64::MAX), Const::Int(1)]),
            Err(OpError::Overflow { .. })
        ));
        assert!(matches!(
            apply_op(Op::Div, &[Const::Int(i64::MIN), Const::Int(-1)]),
            Err(OpError::Overflow { .. })
        ));
    }

    #[test]
    fn ill_sorted_arguments_are_undefined() {
        assert!(apply_op(Op::Add, &[Const::Bool(true), Const::Int(1)]).is_err());
        assert!(apply_op(Op::Not, &[Const::Int(1)]).is_err());
    }
}
