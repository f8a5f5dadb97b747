use std::fmt;
use std::sync::Arc;

/// A region of a source file. Lines and columns are 1-based; `start`/`end`
/// are byte offsets into the file text (half-open).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn synthetic(file: &Arc<str>) -> Self {
        SourceSpan {
            file: file.clone(),
            start_line: 1,
            start_col: 1,
            end_line: 1,
            end_col: 1,
            start: 0,
            end: 0,
        }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        let (first, last) = if self.start <= other.start {
            (self, other)
        } else {
            (other, self)
        };
        let end_src = if last.end >= first.end { last } else { first };
        SourceSpan {
            file: self.file.clone(),
            start_line: first.start_line,
            start_col: first.start_col,
            end_line: end_src.end_line,
            end_col: end_src.end_col,
            start: first.start,
            end: end_src.end,
        }
    }

    pub fn contains(&self, other: &SourceSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}
