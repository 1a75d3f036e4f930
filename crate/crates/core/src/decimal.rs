//! Decimal rendering of balls. A digit is printed only if every point of the
//! ball rounds to it; otherwise fewer digits are printed followed by `~`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::Ball;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

fn pow10(e: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), e as usize)
}

fn scale10(x: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        x * BigRational::from_integer(pow10(e as u32))
    } else {
        x / BigRational::from_integer(pow10((-e) as u32))
    }
}

/// `floor(log10 x)` for `x > 0`.
fn decimal_exponent(x: &BigRational) -> i64 {
    let guess = x.numer().to_string().len() as i64 - x.denom().to_string().len() as i64;
    if scale10(x, -guess) < BigRational::one() {
        guess - 1
    } else {
        guess
    }
}

/// Rounds `x >= 0` to the nearest integer, ties to even.
fn round_half_even(x: &BigRational) -> BigInt {
    let (q, r) = x.numer().div_mod_floor(x.denom());
    let twice: BigInt = &r * 2;
    match twice.cmp(x.denom()) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    }
}

/// `x > 0` rounded to `d` significant digits as `(m, e)` with
/// `x ~ m * 10^(e - d + 1)` and `10^(d-1) <= m < 10^d`.
fn round_sig(x: &BigRational, d: u32, e: i64) -> (BigInt, i64) {
    let m = round_half_even(&scale10(x, d as i64 - 1 - e));
    if m == pow10(d) {
        (pow10(d - 1), e + 1)
    } else {
        (m, e)
    }
}

fn render(negative: bool, mantissa: &BigInt, e: i64) -> String {
    let digits = mantissa.to_string();
    let d = digits.len() as i64;
    let mut s = String::new();
    if negative {
        s.push('-');
    }
    if (-7..21).contains(&e) {
        if e >= 0 {
            let int_len = e + 1;
            if d <= int_len {
                s.push_str(&digits);
                s.push_str(&"0".repeat((int_len - d) as usize));
            } else {
                s.push_str(&digits[..int_len as usize]);
                s.push('.');
                s.push_str(&digits[int_len as usize..]);
            }
        } else {
            s.push_str("0.");
            s.push_str(&"0".repeat((-e - 1) as usize));
            s.push_str(&digits);
        }
    } else {
        s.push_str(&digits[..1]);
        if d > 1 {
            s.push('.');
            s.push_str(&digits[1..]);
        }
        s.push_str(&format!("e{e}"));
    }
    s
}

/// The ball rounded to at most `digits` significant digits.
pub fn format_ball(b: &Ball, digits: u32) -> String {
    let digits = digits.max(1);
    if b.is_exact() && b.midpoint().is_zero() {
        return "0".to_string();
    }
    if b.contains_zero() {
        return "0~".to_string();
    }
    let negative = b.is_negative();
    let (lo, hi) = if negative {
        (b.upper().abs(), b.lower().abs())
    } else {
        (b.lower(), b.upper())
    };
    let lo = lo.to_rational();
    let hi = hi.to_rational();
    let e = decimal_exponent(&b.midpoint().abs().to_rational());
    for d in (1..=digits).rev() {
        let a = round_sig(&lo, d, e);
        let z = round_sig(&hi, d, e);
        if a == z {
            let mut s = render(negative, &a.0, a.1);
            if d < digits {
                s.push('~');
            }
            return s;
        }
    }
    let sign = if negative { "-" } else { "" };
    format!("{sign}0~")
}

/// A non-negative radius as two significant digits, rounded up.
pub fn format_radius(r: &Dyadic) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let x = r.abs().to_rational();
    let mut e = decimal_exponent(&x);
    let scaled = scale10(&x, 1 - e);
    let mut m = scaled.ceil().to_integer();
    if m == BigInt::from(100) {
        m = BigInt::from(10);
        e += 1;
    }
    let s = m.to_string();
    format!("{}.{}e{}", &s[..1], &s[1..], e)
}

/// Parses a decimal as printed by [`format_ball`] and returns the value and
/// half a unit in its last printed place. A bare zero is exact.
pub fn parse_decimal(text: &str) -> Result<(BigRational, BigRational)> {
    let bad = || Error::InvalidSpec(format!("not a decimal number: {text:?}"));
    let uncertain = text.trim().ends_with('~');
    let t = text.trim().trim_end_matches('~');
    let (body, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (negative, body) = match body.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, body.strip_prefix('+').unwrap_or(body)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let mant: BigInt = all.parse().map_err(|_| bad())?;
    if mant.is_zero() && !uncertain {
        return Ok((BigRational::zero(), BigRational::zero()));
    }
    let shift = exp - frac_part.len() as i64;
    let mut value = scale10(&BigRational::from_integer(mant), shift);
    if negative {
        value = -value;
    }
    let half_ulp = scale10(&BigRational::new(BigInt::one(), BigInt::from(2)), shift);
    Ok((value, half_ulp))
}

/// Parses a value and a radius into a ball that contains every number the
/// pair can describe.
pub fn parse_ball(value: &str, radius: &str, precision: u32) -> Result<Ball> {
    let (v, half) = parse_decimal(value)?;
    let (r, r_half) = parse_decimal(radius)?;
    let spread = half + r.abs() + r_half;
    let b = Ball::from_rational(&v.abs(), precision).widen(&Dyadic::ceil_rational(&spread, 32));
    Ok(if v.is_negative() { b.neg_ball() } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exact_values() {
        assert_eq!(format_ball(&Ball::from_i64(3), 5), "3.0000");
        assert_eq!(format_ball(&Ball::zero(), 5), "0");
        assert_eq!(format_ball(&Ball::from_i64(-1200), 2), "-1200");
        assert_eq!(format_ball(&Ball::exact(Dyadic::pow2(-3)), 3), "0.125");
    }

    #[test]
    fn rounding_and_exponents() {
        let third = Ball::from_rational(&rat(1, 3), 128);
        assert_eq!(format_ball(&third, 6), "0.333333");
        let two_thirds = Ball::from_rational(&rat(2, 3), 128);
        assert_eq!(format_ball(&two_thirds, 3), "0.667");
        let tiny = Ball::from_rational(&rat(1, 3_000_000_000), 128);
        assert_eq!(format_ball(&tiny, 4), "3.333e-10");
        let nines = Ball::from_rational(&rat(99999, 100000), 128);
        assert_eq!(format_ball(&nines, 3), "1.00");
    }

    #[test]
    fn uncertain_digits_are_marked() {
        let b = Ball::new(Dyadic::one(), Dyadic::pow2(-10), 64);
        let s = format_ball(&b, 10);
        assert!(s.ends_with('~'), "{s}");
        assert!(s.starts_with("1.0"), "{s}");
        let z = Ball::error(Dyadic::pow2(-10));
        assert_eq!(format_ball(&z, 10), "0~");
    }

    #[test]
    fn radius_rounds_up() {
        assert_eq!(format_radius(&Dyadic::zero()), "0");
        assert_eq!(format_radius(&Dyadic::pow2(-10)), "9.8e-4");
        assert_eq!(format_radius(&Dyadic::from_i64(1)), "1.0e0");
        assert_eq!(format_radius(&Dyadic::from_i64(99)), "9.9e1");
    }

    #[test]
    fn parse_round_trip() {
        let (v, h) = parse_decimal("-0.125").unwrap();
        assert_eq!(v, rat(-1, 8));
        assert_eq!(h, rat(1, 2000));
        let (v, h) = parse_decimal("3.333e-10~").unwrap();
        assert_eq!(v, rat(3333, 10_000_000_000_000));
        assert_eq!(h, rat(1, 2 * 10_000_000_000_000));
        assert_eq!(parse_decimal("0").unwrap(), (rat(0, 1), rat(0, 1)));
        assert_eq!(parse_decimal("0~").unwrap().1, rat(1, 2));
        assert!(parse_decimal("abc").is_err());
        assert!(parse_decimal("").is_err());
        let third = Ball::from_rational(&rat(1, 3), 128);
        let b = parse_ball(&format_ball(&third, 20), &format_radius(third.radius()), 128).unwrap();
        assert!(b.contains_rational(&rat(1, 3)));
        let up = parse_ball("0.1", "1.0e-5", 64).unwrap();
        let down = parse_ball("-0.1", "1.0e-5", 64).unwrap();
        assert_eq!(down, up.neg_ball());
    }
}
