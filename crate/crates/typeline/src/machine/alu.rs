//! Shared arithmetic, comparison, and conversion routines.
//!
//! Every executor in the crate (the typed-lane machine, the baseline
//! IR executor, and the reference AST interpreter) computes through
//! these functions, so their outputs agree bit for bit, including
//! float rounding, wrapping overflow, and NaN behaviour.
//!
//! Semantics: int is 32-bit two's complement with wrapping overflow;
//! long is the same at 64 bits; char is 8-bit unsigned wrapping; float
//! and double are IEEE-754 with division by zero producing infinity.
//! Integer and char division by zero is a trap. Shift amounts are
//! masked to the operand width.

use thiserror::Error;

use crate::isa::{BinKind, CmpPred, Imm, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AluError {
    #[error("integer division by zero")]
    DivisionByZero,
    #[error("operand kinds do not match")]
    KindMismatch,
    #[error("operation not defined for this kind")]
    Unsupported,
}

fn bin_i32(op: BinKind, a: i32, b: i32) -> Result<i32, AluError> {
    Ok(match op {
        BinKind::Add => a.wrapping_add(b),
        BinKind::Sub => a.wrapping_sub(b),
        BinKind::Mul => a.wrapping_mul(b),
        BinKind::Div => {
            if b == 0 {
                return Err(AluError::DivisionByZero);
            }
            a.wrapping_div(b)
        }
        BinKind::And => a & b,
        BinKind::Or => a | b,
        BinKind::Xor => a ^ b,
        BinKind::Nor => !(a | b),
        BinKind::Xnor => !(a ^ b),
        BinKind::Sra => a >> (b & 31),
        BinKind::Srl => ((a as u32) >> (b & 31)) as i32,
    })
}

fn bin_i64(op: BinKind, a: i64, b: i64) -> Result<i64, AluError> {
    Ok(match op {
        BinKind::Add => a.wrapping_add(b),
        BinKind::Sub => a.wrapping_sub(b),
        BinKind::Mul => a.wrapping_mul(b),
        BinKind::Div => {
            if b == 0 {
                return Err(AluError::DivisionByZero);
            }
            a.wrapping_div(b)
        }
        BinKind::And => a & b,
        BinKind::Or => a | b,
        BinKind::Xor => a ^ b,
        BinKind::Nor => !(a | b),
        BinKind::Xnor => !(a ^ b),
        BinKind::Sra => a >> (b & 63),
        BinKind::Srl => ((a as u64) >> (b & 63)) as i64,
    })
}

fn bin_u8(op: BinKind, a: u8, b: u8) -> Result<u8, AluError> {
    Ok(match op {
        BinKind::Add => a.wrapping_add(b),
        BinKind::Sub => a.wrapping_sub(b),
        BinKind::Mul => a.wrapping_mul(b),
        BinKind::Div => {
            if b == 0 {
                return Err(AluError::DivisionByZero);
            }
            a / b
        }
        BinKind::And => a & b,
        BinKind::Or => a | b,
        BinKind::Xor => a ^ b,
        BinKind::Nor => !(a | b),
        BinKind::Xnor => !(a ^ b),
        // char is unsigned, so arithmetic and logical right shift agree.
        BinKind::Sra | BinKind::Srl => a >> (b & 7),
    })
}

fn bin_f32(op: BinKind, a: f32, b: f32) -> Result<f32, AluError> {
    Ok(match op {
        BinKind::Add => a + b,
        BinKind::Sub => a - b,
        BinKind::Mul => a * b,
        BinKind::Div => a / b,
        _ => return Err(AluError::Unsupported),
    })
}

fn bin_f64(op: BinKind, a: f64, b: f64) -> Result<f64, AluError> {
    Ok(match op {
        BinKind::Add => a + b,
        BinKind::Sub => a - b,
        BinKind::Mul => a * b,
        BinKind::Div => a / b,
        _ => return Err(AluError::Unsupported),
    })
}

/// Apply a binary operation to two same-kind values.
pub fn bin(op: BinKind, a: Imm, b: Imm) -> Result<Imm, AluError> {
    match (a, b) {
        (Imm::Int(x), Imm::Int(y)) => bin_i32(op, x, y).map(Imm::Int),
        (Imm::Long(x), Imm::Long(y)) => bin_i64(op, x, y).map(Imm::Long),
        (Imm::Char(x), Imm::Char(y)) => bin_u8(op, x, y).map(Imm::Char),
        (Imm::Float(x), Imm::Float(y)) => bin_f32(op, x, y).map(Imm::Float),
        (Imm::Double(x), Imm::Double(y)) => bin_f64(op, x, y).map(Imm::Double),
        _ => Err(AluError::KindMismatch),
    }
}

fn cmp_ord<T: PartialOrd + PartialEq>(pred: CmpPred, a: T, b: T) -> bool {
    match pred {
        CmpPred::Eq => a == b,
        CmpPred::Ne => a != b,
        CmpPred::Lt => a < b,
        CmpPred::Le => a <= b,
        CmpPred::Gt => a > b,
        CmpPred::Ge => a >= b,
    }
}

/// Compare two same-kind values. Float comparisons are IEEE: every
/// ordered predicate is false when either side is NaN.
pub fn cmp(pred: CmpPred, a: Imm, b: Imm) -> Result<bool, AluError> {
    match (a, b) {
        (Imm::Int(x), Imm::Int(y)) => Ok(cmp_ord(pred, x, y)),
        (Imm::Long(x), Imm::Long(y)) => Ok(cmp_ord(pred, x, y)),
        (Imm::Char(x), Imm::Char(y)) => Ok(cmp_ord(pred, x, y)),
        (Imm::Float(x), Imm::Float(y)) => Ok(cmp_ord(pred, x, y)),
        (Imm::Double(x), Imm::Double(y)) => Ok(cmp_ord(pred, x, y)),
        _ => Err(AluError::KindMismatch),
    }
}

/// Convert a value to a target kind.
///
/// The supported widenings are IEEE: int to float rounds to nearest
/// even, int to double and float to double are exact. The remaining
/// directions exist for the traditional lane, which narrows like C
/// (float to int truncates toward zero, saturating at the type
/// bounds; narrowing integer conversions wrap).
pub fn convert(v: Imm, to: Scalar) -> Imm {
    match to {
        Scalar::Int => Imm::Int(match v {
            Imm::Int(x) => x,
            Imm::Char(x) => x as i32,
            Imm::Long(x) => x as i32,
            Imm::Float(x) => x as i32,
            Imm::Double(x) => x as i32,
        }),
        Scalar::Long => Imm::Long(match v {
            Imm::Int(x) => x as i64,
            Imm::Char(x) => x as i64,
            Imm::Long(x) => x,
            Imm::Float(x) => x as i64,
            Imm::Double(x) => x as i64,
        }),
        Scalar::Char => Imm::Char(match v {
            Imm::Int(x) => x as u8,
            Imm::Char(x) => x,
            Imm::Long(x) => x as u8,
            Imm::Float(x) => x as u8,
            Imm::Double(x) => x as u8,
        }),
        Scalar::Float => Imm::Float(match v {
            Imm::Int(x) => x as f32,
            Imm::Char(x) => x as f32,
            Imm::Long(x) => x as f32,
            Imm::Float(x) => x,
            Imm::Double(x) => x as f32,
        }),
        Scalar::Double => Imm::Double(match v {
            Imm::Int(x) => x as f64,
            Imm::Char(x) => x as f64,
            Imm::Long(x) => x as f64,
            Imm::Float(x) => x as f64,
            Imm::Double(x) => x,
        }),
    }
}

/// Branch test: nonzero is taken. Negative zero and NaN follow IEEE
/// equality, so -0.0 is not taken and NaN is.
pub fn is_nonzero(v: Imm) -> bool {
    match v {
        Imm::Int(x) => x != 0,
        Imm::Long(x) => x != 0,
        Imm::Char(x) => x != 0,
        Imm::Float(x) => x != 0.0,
        Imm::Double(x) => x != 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_wraps_and_traps() {
        assert_eq!(bin(BinKind::Add, Imm::Int(i32::MAX), Imm::Int(1)), Ok(Imm::Int(i32::MIN)));
        assert_eq!(
            bin(BinKind::Div, Imm::Int(i32::MIN), Imm::Int(-1)),
            Ok(Imm::Int(i32::MIN))
        );
        assert_eq!(bin(BinKind::Div, Imm::Int(5), Imm::Int(0)), Err(AluError::DivisionByZero));
        assert_eq!(bin(BinKind::Srl, Imm::Int(-8), Imm::Int(1)), Ok(Imm::Int(0x7FFF_FFFC)));
        assert_eq!(bin(BinKind::Sra, Imm::Int(-8), Imm::Int(1)), Ok(Imm::Int(-4)));
        assert_eq!(bin(BinKind::Sra, Imm::Int(1), Imm::Int(33)), Ok(Imm::Int(0)));
    }

    #[test]
    fn char_is_unsigned_wrapping() {
        assert_eq!(bin(BinKind::Sub, Imm::Char(0), Imm::Char(1)), Ok(Imm::Char(255)));
        assert_eq!(bin(BinKind::Add, Imm::Char(200), Imm::Char(100)), Ok(Imm::Char(44)));
        assert_eq!(bin(BinKind::Div, Imm::Char(7), Imm::Char(0)), Err(AluError::DivisionByZero));
        assert_eq!(bin(BinKind::Sra, Imm::Char(0x80), Imm::Char(1)), Ok(Imm::Char(0x40)));
    }

    #[test]
    fn float_division_by_zero_is_infinite() {
        assert_eq!(bin(BinKind::Div, Imm::Float(1.0), Imm::Float(0.0)), Ok(Imm::Float(f32::INFINITY)));
        match bin(BinKind::Div, Imm::Float(0.0), Imm::Float(0.0)) {
            Ok(Imm::Float(v)) => assert!(v.is_nan()),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(bin(BinKind::And, Imm::Float(1.0), Imm::Float(1.0)), Err(AluError::Unsupported));
    }

    #[test]
    fn nan_comparisons_follow_ieee() {
        let nan = Imm::Float(f32::NAN);
        assert_eq!(cmp(CmpPred::Eq, nan, nan), Ok(false));
        assert_eq!(cmp(CmpPred::Ne, nan, nan), Ok(true));
        assert_eq!(cmp(CmpPred::Lt, nan, Imm::Float(1.0)), Ok(false));
        assert_eq!(cmp(CmpPred::Ge, nan, Imm::Float(1.0)), Ok(false));
    }

    #[test]
    fn widening_conversions_are_ieee() {
        assert_eq!(convert(Imm::Int(7), Scalar::Float), Imm::Float(7.0));
        assert_eq!(convert(Imm::Float(0.5), Scalar::Double), Imm::Double(0.5));
        // Round to nearest even at the edge of f32 precision.
        assert_eq!(convert(Imm::Int(i32::MAX), Scalar::Float), Imm::Float(2_147_483_648.0));
        assert_eq!(convert(Imm::Int(16_777_217), Scalar::Float), Imm::Float(16_777_216.0));
        // Every i32 is exact in f64.
        assert_eq!(convert(Imm::Int(i32::MAX), Scalar::Double), Imm::Double(2_147_483_647.0));
        assert_eq!(convert(Imm::Char(200), Scalar::Int), Imm::Int(200));
    }

    #[test]
    fn narrowing_conversions_match_c() {
        assert_eq!(convert(Imm::Float(-2.9), Scalar::Int), Imm::Int(-2));
        assert_eq!(convert(Imm::Double(1e20), Scalar::Int), Imm::Int(i32::MAX));
        assert_eq!(convert(Imm::Long(0x1_0000_0001), Scalar::Int), Imm::Int(1));
        assert_eq!(convert(Imm::Int(257), Scalar::Char), Imm::Char(1));
    }

    #[test]
    fn zero_tests_handle_signed_zero_and_nan() {
        assert!(!is_nonzero(Imm::Float(-0.0)));
        assert!(is_nonzero(Imm::Float(f32::NAN)));
        assert!(!is_nonzero(Imm::Int(0)));
        assert!(is_nonzero(Imm::Char(255)));
    }
}
