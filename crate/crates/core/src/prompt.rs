//! The checklist review prompt.
//!
//! The canonical template ships as `resources/checklist_prompt.txt`. Its first
//! line carries the `(code)` slot; the file under review is inserted as a
//! fenced block right after that line, and the checklist follows unchanged.

use std::path::Path;

use serde::Serialize;

pub const CANONICAL_TEMPLATE: &str = include_str!("../resources/checklist_prompt.txt");

/// SHA-256 of [`CANONICAL_TEMPLATE`]. Any edit to the checklist text must update this.
pub const CANONICAL_TEMPLATE_SHA256: &str =
    "a34be47bf859bded9f540bccdc8664a86eb9bf873db36f1f11ff0fe07ed94e73";

pub const CODE_SLOT: &str = "(code)";
pub const NUMBERED_LIST_INSTRUCTION: &str =
    "Provide your feedback in a numbered list for each category.";

pub const DEFAULT_MAX_PAYLOAD_CHARS: usize = 12_000;
pub const MIN_PAYLOAD_CHARS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("nothing to review: the code payload is empty")]
    EmptyPayload,
    #[error("payload chunk limit {0} is below the minimum of {MIN_PAYLOAD_CHARS} characters")]
    ChunkLimitTooSmall(usize),
    #[error("prompt template has no {CODE_SLOT} slot")]
    MissingCodeSlot,
    #[error("cannot read prompt template {path}: {message}")]
    TemplateIo { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChecklistItem {
    pub letter: char,
    pub name: &'static str,
    pub instruction: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChecklistCategory {
    pub index: u8,
    pub title: &'static str,
    pub items: &'static [ChecklistItem],
}

const fn item(letter: char, name: &'static str, instruction: &'static str) -> ChecklistItem {
    ChecklistItem {
        letter,
        name,
        instruction,
    }
}

/// Defect categories the reviewer is asked to walk through, in prompt order.
pub const CHECKLIST: [ChecklistCategory; 8] = [
    ChecklistCategory {
        index: 1,
        title: "Documentation Defects",
        items: &[
            item('a', "Naming", "Assess the quality of software element names."),
            item('b', "Comment", "Analyse the quality and accuracy of code comments."),
        ],
    },
    ChecklistCategory {
        index: 2,
        title: "Visual Representation Defects",
        items: &[
            item('a', "Bracket Usage", "Identify any issues with incorrect or missing brackets."),
            item('b', "Indentation", "Check for incorrect indentation that affects readability."),
            item('c', "Long Line", "Point out any long code statements that hinder readability."),
        ],
    },
    ChecklistCategory {
        index: 3,
        title: "Structure Defects",
        items: &[
            item('a', "Dead Code", "Find any code statements that serve no meaningful purpose."),
            item('b', "Duplication", "Identify duplicate code statements that can be refactored."),
        ],
    },
    ChecklistCategory {
        index: 4,
        title: "New Functionality",
        items: &[item(
            'a',
            "Use Standard Method",
            "Determine if a standardised approach should be used for single-purpose code statements.",
        )],
    },
    ChecklistCategory {
        index: 5,
        title: "Resource Defects",
        items: &[
            item(
                'a',
                "Variable Initialisation",
                "Identify variables that are uninitialised or incorrectly initialised.",
            ),
            item('b', "Memory Management", "Evaluate the program's memory usage and management."),
        ],
    },
    ChecklistCategory {
        index: 6,
        title: "Check Defects",
        items: &[item(
            'a',
            "Check User Input",
            "Analyse the validity of user input and its handling.",
        )],
    },
    ChecklistCategory {
        index: 7,
        title: "Interface Defects",
        items: &[item(
            'a',
            "Parameter",
            "Detect incorrect or missing parameters when calling functions or libraries.",
        )],
    },
    ChecklistCategory {
        index: 8,
        title: "Logic Defects",
        items: &[
            item('a', "Compute", "Identify incorrect logic during system execution."),
            item('b', "Performance", "Evaluate the efficiency of the algorithm used."),
        ],
    },
];

impl ChecklistCategory {
    pub fn heading(&self) -> String {
        format!("{}. {}:", self.index, self.title)
    }
}

impl ChecklistItem {
    pub fn line(&self) -> String {
        format!("   {}. {}: {}", self.letter, self.name, self.instruction)
    }
}

/// Which slice of a file a request covers, when the file had to be split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PartLabel {
    pub index: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReviewRequest {
    pub file_path: String,
    pub code_payload: String,
    pub prompt_text: String,
    pub part: Option<PartLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    text: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self::canonical()
    }
}

impl PromptTemplate {
    pub fn canonical() -> Self {
        Self {
            text: CANONICAL_TEMPLATE.to_string(),
        }
    }

    pub fn from_text(text: impl Into<String>) -> Result<Self, PromptError> {
        let text = text.into();
        if !text.contains(CODE_SLOT) {
            return Err(PromptError::MissingCodeSlot);
        }
        Ok(Self { text })
    }

    pub fn load(path: &Path) -> Result<Self, PromptError> {
        let text = std::fs::read_to_string(path).map_err(|e| PromptError::TemplateIo {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_text(text)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    fn render(&self, file_path: &str, payload: &str, part: Option<PartLabel>) -> String {
        let mut out = String::with_capacity(self.text.len() + payload.len() + 64);
        let mut inserted = false;
        for line in self.text.split_inclusive('\n') {
            if !inserted && line.contains(CODE_SLOT) {
                out.push_str(&line.replacen(CODE_SLOT, "code", 1));
                if !line.ends_with('\n') {
                    out.push('\n');
                }
                match part {
                    Some(p) => out.push_str(&format!(
                        "File: {file_path} (part {} of {})\n",
                        p.index, p.total
                    )),
                    None => out.push_str(&format!("File: {file_path}\n")),
                }
                let fence = fence_for(payload);
                out.push_str(&fence);
                out.push('\n');
                out.push_str(payload);
                if !payload.ends_with('\n') {
                    out.push('\n');
                }
                out.push_str(&fence);
                out.push('\n');
                inserted = true;
            } else {
                out.push_str(line);
            }
        }
        out
    }
}

/// A backtick fence longer than any backtick run inside `payload`.
fn fence_for(payload: &str) -> String {
    let mut longest = 0;
    let mut run = 0;
    for c in payload.chars() {
        if c == '`' {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    "`".repeat((longest + 1).max(3))
}

/// Builds the canonical prompt for one file.
pub fn build_prompt(file_path: &str, code_payload: &str) -> Result<ReviewRequest, PromptError> {
    PromptBuilder::default().build(file_path, code_payload, None)
}

/// Splits `content` into pieces of at most `max_chars` characters.
///
/// Pieces break after a newline unless a single line is longer than the
/// limit, in which case that line is cut mid-way. Concatenating the pieces
/// gives back `content`.
pub fn chunk_payload(content: &str, max_chars: usize) -> Result<Vec<String>, PromptError> {
    if max_chars < MIN_PAYLOAD_CHARS {
        return Err(PromptError::ChunkLimitTooSmall(max_chars));
    }
    let mut chunks = Vec::new();
    let mut current = String::new();
    let mut current_chars = 0;
    for line in content.split_inclusive('\n') {
        let line_chars = line.chars().count();
        if current_chars + line_chars <= max_chars {
            current.push_str(line);
            current_chars += line_chars;
            continue;
        }
        if !current.is_empty() {
            chunks.push(std::mem::take(&mut current));
            current_chars = 0;
        }
        if line_chars <= max_chars {
            current.push_str(line);
            current_chars = line_chars;
            continue;
        }
        let chars: Vec<char> = line.chars().collect();
        let mut pieces = chars.chunks(max_chars).peekable();
        while let Some(piece) = pieces.next() {
            let piece: String = piece.iter().collect();
            if pieces.peek().is_some() {
                chunks.push(piece);
            } else {
                current_chars = piece.chars().count();
                current = piece;
            }
        }
    }
    if !current.is_empty() {
        chunks.push(current);
    }
    Ok(chunks)
}

#[derive(Debug, Clone)]
pub struct PromptBuilder {
    template: PromptTemplate,
    max_payload_chars: usize,
}

impl Default for PromptBuilder {
    fn default() -> Self {
        Self {
            template: PromptTemplate::canonical(),
            max_payload_chars: DEFAULT_MAX_PAYLOAD_CHARS,
        }
    }
}

impl PromptBuilder {
    pub fn new(template: PromptTemplate, max_payload_chars: usize) -> Result<Self, PromptError> {
        if max_payload_chars < MIN_PAYLOAD_CHARS {
            return Err(PromptError::ChunkLimitTooSmall(max_payload_chars));
        }
        Ok(Self {
            template,
            max_payload_chars,
        })
    }

    pub fn max_payload_chars(&self) -> usize {
        self.max_payload_chars
    }

    pub fn build(
        &self,
        file_path: &str,
        code_payload: &str,
        part: Option<PartLabel>,
    ) -> Result<ReviewRequest, PromptError> {
        if code_payload.is_empty() {
            return Err(PromptError::EmptyPayload);
        }
        Ok(ReviewRequest {
            file_path: file_path.to_string(),
            code_payload: code_payload.to_string(),
            prompt_text: self.template.render(file_path, code_payload, part),
            part,
        })
    }

    /// One request per chunk of `content`; chunk labels appear only when
    /// the file needed more than one.
    pub fn requests_for_file(
        &self,
        file_path: &str,
        content: &str,
    ) -> Result<Vec<ReviewRequest>, PromptError> {
        let chunks = chunk_payload(content, self.max_payload_chars)?;
        if chunks.is_empty() {
            return Err(PromptError::EmptyPayload);
        }
        let total = chunks.len();
        chunks
            .iter()
            .enumerate()
            .map(|(i, chunk)| {
                let part = (total > 1).then_some(PartLabel {
                    index: i + 1,
                    total,
                });
                self.build(file_path, chunk, part)
            })
            .collect()
    }
}
