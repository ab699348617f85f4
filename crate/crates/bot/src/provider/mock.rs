use async_trait::async_trait;
use reviewloop_core::prompt::{ReviewRequest, CHECKLIST};
use sha2::{Digest, Sha256};

use super::{ProviderError, ReviewProvider};

/// Offline provider. The reply lists every checklist category and is a pure
/// function of the file path and payload.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockProvider;

impl MockProvider {
    pub fn review_text(req: &ReviewRequest) -> String {
        let digest = hex::encode(Sha256::digest(req.code_payload.as_bytes()));
        let lines = req.code_payload.lines().count();
        let mut out = String::new();
        if let Some(part) = req.part {
            out.push_str(&format!("Part {} of {}.\n\n", part.index, part.total));
        }
        for cat in &CHECKLIST {
            out.push_str(&format!("{}. {}:\n", cat.index, cat.title));
            for item in cat.items {
                out.push_str(&format!(
                    "   {}. {}: no issue found in {} ({} lines, payload {}).\n",
                    item.letter,
                    item.name,
                    req.file_path,
                    lines,
                    &digest[..12]
                ));
            }
        }
        out
    }
}

#[async_trait]
impl ReviewProvider for MockProvider {
    async fn complete(&self, req: &ReviewRequest) -> Result<String, ProviderError> {
        Ok(Self::review_text(req))
    }
}
