//! Single-range `Range: bytes=` support for audio bodies.

use axum::body::{Body, Bytes};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ByteRange {
    Full,
    Partial(u64, u64),
    Unsatisfiable,
}

/// Interprets a Range header against a body of `len` bytes. Malformed or
/// multi-range headers fall back to the full body.
pub(crate) fn parse_range(value: Option<&str>, len: u64) -> ByteRange {
    let Some(spec) = value.and_then(|v| v.trim().strip_prefix("bytes=")) else {
        return ByteRange::Full;
    };
    if spec.contains(',') {
        return ByteRange::Full;
    }
    let Some((a, b)) = spec.split_once('-') else {
        return ByteRange::Full;
    };
    let (a, b) = (a.trim(), b.trim());
    let parsed = match (a.is_empty(), b.is_empty()) {
        (false, _) => {
            let Ok(start) = a.parse::<u64>() else {
                return ByteRange::Full;
            };
            let end = if b.is_empty() {
                len.saturating_sub(1)
            } else {
                match b.parse::<u64>() {
                    Ok(e) if e >= start => e.min(len.saturating_sub(1)),
                    _ => return ByteRange::Full,
                }
            };
            if start >= len {
                return ByteRange::Unsatisfiable;
            }
            (start, end)
        }
        (true, false) => {
            let Ok(n) = b.parse::<u64>() else {
                return ByteRange::Full;
            };
            if n == 0 || len == 0 {
                return ByteRange::Unsatisfiable;
            }
            (len.saturating_sub(n), len - 1)
        }
        (true, true) => return ByteRange::Full,
    };
    ByteRange::Partial(parsed.0, parsed.1)
}

/// Responds with `body`, honoring a single byte range.
pub(crate) fn serve_bytes(headers: &HeaderMap, body: Bytes, content_type: &'static str) -> Response {
    let len = body.len() as u64;
    let range = parse_range(headers.get(header::RANGE).and_then(|v| v.to_str().ok()), len);
    let ct = HeaderValue::from_static(content_type);
    let accept = HeaderValue::from_static("bytes");
    match range {
        ByteRange::Full => (
            StatusCode::OK,
            [(header::CONTENT_TYPE, ct), (header::ACCEPT_RANGES, accept)],
            Body::from(body),
        )
            .into_response(),
        ByteRange::Partial(start, end) => {
            let slice = body.slice(start as usize..=end as usize);
            let content_range = HeaderValue::from_str(&format!("bytes {start}-{end}/{len}"))
                .expect("ascii header");
            (
                StatusCode::PARTIAL_CONTENT,
                [
                    (header::CONTENT_TYPE, ct),
                    (header::ACCEPT_RANGES, accept),
                    (header::CONTENT_RANGE, content_range),
                ],
                Body::from(slice),
            )
                .into_response()
        }
        ByteRange::Unsatisfiable => (
            StatusCode::RANGE_NOT_SATISFIABLE,
            [(
                header::CONTENT_RANGE,
                HeaderValue::from_str(&format!("bytes */{len}")).expect("ascii header"),
            )],
        )
            .into_response(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_forms() {
        assert_eq!(parse_range(None, 100), ByteRange::Full);
        assert_eq!(parse_range(Some("bytes=0-43"), 100), ByteRange::Partial(0, 43));
        assert_eq!(parse_range(Some("bytes=50-"), 100), ByteRange::Partial(50, 99));
        assert_eq!(parse_range(Some("bytes=-10"), 100), ByteRange::Partial(90, 99));
        assert_eq!(parse_range(Some("bytes=90-500"), 100), ByteRange::Partial(90, 99));
        assert_eq!(parse_range(Some("bytes=100-"), 100), ByteRange::Unsatisfiable);
        assert_eq!(parse_range(Some("bytes=5-2"), 100), ByteRange::Full);
        assert_eq!(parse_range(Some("bytes=0-1,5-6"), 100), ByteRange::Full);
        assert_eq!(parse_range(Some("items=0-1"), 100), ByteRange::Full);
    }
}
