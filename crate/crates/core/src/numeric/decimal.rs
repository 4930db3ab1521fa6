//! Decimal string conversion for `Real` values.

use super::Real;

pub(crate) fn digits_for(bits: u32) -> usize {
    // one guard digit beyond log10(2^bits)
    (bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1
}

fn pow10<R: Real>(e: i32) -> R {
    let ten = R::from_f64(10.0);
    if e >= 0 {
        ten.powi(e)
    } else {
        R::one() / ten.powi(-e)
    }
}

/// Scientific notation `d.ddd…e±x` with `digits` significant digits.
pub(crate) fn format_sci<R: Real>(x: R, digits: usize) -> String {
    let xf = x.to_f64();
    if xf.is_nan() {
        return "NaN".into();
    }
    if xf.is_infinite() {
        return if xf > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == R::zero() {
        return "0".into();
    }
    let neg = x < R::zero();
    let a = x.abs();
    let mut e = a.to_f64().log10().floor() as i32;
    let mut y = a / pow10::<R>(e);
    let ten = R::from_f64(10.0);
    if y >= ten {
        y /= ten;
        e += 1;
    } else if y < R::one() {
        y *= ten;
        e -= 1;
    }
    let mut ds: Vec<u8> = Vec::with_capacity(digits + 1);
    for _ in 0..=digits {
        let d = y.floor();
        let di = (d.to_f64() as i64).clamp(0, 9) as u8;
        ds.push(di);
        y = (y - R::from_f64(di as f64)) * ten;
    }
    // round half up on the guard digit
    let guard = ds.pop().unwrap_or(0);
    if guard >= 5 {
        let mut i = ds.len();
        loop {
            if i == 0 {
                ds.insert(0, 1);
                ds.pop();
                e += 1;
                break;
            }
            i -= 1;
            if ds[i] == 9 {
                ds[i] = 0;
            } else {
                ds[i] += 1;
                break;
            }
        }
    }
    while ds.len() > 1 && *ds.last().unwrap() == 0 {
        ds.pop();
    }
    let mut s = String::with_capacity(digits + 8);
    if neg {
        s.push('-');
    }
    s.push((b'0' + ds[0]) as char);
    if ds.len() > 1 {
        s.push('.');
        for &d in &ds[1..] {
            s.push((b'0' + d) as char);
        }
    }
    if e != 0 {
        s.push('e');
        s.push_str(&e.to_string());
    }
    s
}

/// Parse a decimal literal (`-1.25e-3`, `42`, `.5`) into `R`.
pub(crate) fn parse<R: Real>(s: &str) -> Option<R> {
    let s = s.trim();
    let (neg, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let ten = R::from_f64(10.0);
    let mut acc = R::zero();
    let mut chunk: i64 = 0;
    let mut chunk_len = 0;
    let mut n_frac = 0i32;
    let flush = |acc: &mut R, chunk: &mut i64, len: &mut i32| {
        if *len > 0 {
            *acc = *acc * ten.powi(*len) + R::from_i64(*chunk);
            *chunk = 0;
            *len = 0;
        }
    };
    for (part, is_frac) in [(int_part, false), (frac_part, true)] {
        for c in part.bytes() {
            if !c.is_ascii_digit() {
                return None;
            }
            chunk = chunk * 10 + (c - b'0') as i64;
            chunk_len += 1;
            if is_frac {
                n_frac += 1;
            }
            if chunk_len == 15 {
                flush(&mut acc, &mut chunk, &mut chunk_len);
            }
        }
    }
    flush(&mut acc, &mut chunk, &mut chunk_len);
    let e = exp - n_frac;
    let v = if e >= 0 { acc * pow10::<R>(e) } else { acc / pow10::<R>(-e) };
    Some(if neg { -v } else { v })
}
