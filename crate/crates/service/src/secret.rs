//! Reversible obfuscation of tokens at rest.
//!
//! XOR with a SHA-256 keystream derived from the service secret and a
//! random per-value nonce. This keeps tokens out of plain sight in the
//! session file; it is not authenticated encryption.

use base64::engine::general_purpose::STANDARD_NO_PAD;
use base64::Engine;
use rand::RngCore;
use sha2::{Digest, Sha256};

const NONCE_LEN: usize = 16;
const TAG_LEN: usize = 8;

#[derive(Clone)]
pub struct Obfuscator {
    secret: Vec<u8>,
}

impl std::fmt::Debug for Obfuscator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Obfuscator(..)")
    }
}

impl Obfuscator {
    pub fn new(secret: impl AsRef<[u8]>) -> Self {
        Self {
            secret: secret.as_ref().to_vec(),
        }
    }

    /// A throwaway secret; values sealed with it do not survive a restart.
    pub fn ephemeral() -> Self {
        let mut secret = [0u8; 32];
        rand::rng().fill_bytes(&mut secret);
        Self::new(secret)
    }

    fn keystream(&self, nonce: &[u8], len: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(len + 32);
        let mut counter: u64 = 0;
        while out.len() < len {
            let mut h = Sha256::new();
            h.update(&self.secret);
            h.update(nonce);
            h.update(counter.to_le_bytes());
            out.extend_from_slice(&h.finalize());
            counter += 1;
        }
        out.truncate(len);
        out
    }

    // Detects a wrong secret or a corrupted value.
    fn tag(&self, nonce: &[u8], plain: &[u8]) -> [u8; TAG_LEN] {
        let mut h = Sha256::new();
        h.update(b"tag");
        h.update(&self.secret);
        h.update(nonce);
        h.update(plain);
        let digest = h.finalize();
        let mut tag = [0u8; TAG_LEN];
        tag.copy_from_slice(&digest[..TAG_LEN]);
        tag
    }

    pub fn seal(&self, plain: &str) -> String {
        let mut nonce = [0u8; NONCE_LEN];
        rand::rng().fill_bytes(&mut nonce);
        let ks = self.keystream(&nonce, plain.len());
        let mut out = nonce.to_vec();
        out.extend_from_slice(&self.tag(&nonce, plain.as_bytes()));
        out.extend(plain.bytes().zip(ks).map(|(b, k)| b ^ k));
        STANDARD_NO_PAD.encode(out)
    }

    pub fn open(&self, sealed: &str) -> Option<String> {
        let raw = STANDARD_NO_PAD.decode(sealed).ok()?;
        if raw.len() < NONCE_LEN + TAG_LEN {
            return None;
        }
        let (nonce, rest) = raw.split_at(NONCE_LEN);
        let (tag, body) = rest.split_at(TAG_LEN);
        let ks = self.keystream(nonce, body.len());
        let plain: Vec<u8> = body.iter().zip(ks).map(|(b, k)| b ^ k).collect();
        if self.tag(nonce, &plain) != tag {
            return None;
        }
        String::from_utf8(plain).ok()
    }
}
