use std::io::Read;

use flate2::read::MultiGzDecoder;

use crate::ingest::ContentEncoding;

/// Default ceiling on inflated payload size.
pub const DEFAULT_OUTPUT_CAP: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decompressed {
    pub bytes: Vec<u8>,
    pub diagnostics: Vec<String>,
}

/// Inflates gzip bodies up to `cap` bytes. Corrupt streams yield an empty
/// payload and a diagnostic; oversized ones are truncated at `cap`.
pub fn decompress_if_needed(body: &[u8], encoding: ContentEncoding, cap: usize) -> Decompressed {
    match encoding {
        ContentEncoding::Identity => Decompressed {
            bytes: body.to_vec(),
            diagnostics: Vec::new(),
        },
        ContentEncoding::Gzip => {
            let mut out = Vec::new();
            let mut reader = MultiGzDecoder::new(body).take(cap as u64 + 1);
            match reader.read_to_end(&mut out) {
                Ok(_) if out.len() > cap => {
                    out.truncate(cap);
                    Decompressed {
                        bytes: out,
                        diagnostics: vec![format!("gzip payload exceeds {cap} bytes, truncated")],
                    }
                }
                Ok(_) => Decompressed {
                    bytes: out,
                    diagnostics: Vec::new(),
                },
                Err(e) => Decompressed {
                    bytes: Vec::new(),
                    diagnostics: vec![format!("corrupt gzip payload skipped: {e}")],
                },
            }
        }
    }
}
