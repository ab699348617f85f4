//! Wire format of the comments the bot posts.
//!
//! The telemetry classifier keys on these strings, so they are fixed.

/// Every successful review comment starts with this, followed by the file path.
pub const SUCCESS_HEADER: &str = "ChatGPT review for ";

/// Every comment explaining why no review was produced starts with this.
pub const FAILURE_HEADER: &str = "LLM review could not run";

/// `ChatGPT review for <path>:` followed by the provider's text.
pub fn review_comment_body(file_path: &str, review_text: &str) -> String {
    format!("{SUCCESS_HEADER}{file_path}:\n\n{}", review_text.trim_end())
}
