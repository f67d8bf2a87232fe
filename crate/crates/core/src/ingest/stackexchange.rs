//! Building expert-finding datasets from Stack Exchange `Posts.xml` dumps.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::BufRead;

use log::{debug, info};
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Document, SparseMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PostType {
    Question,
    Answer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackExchangePost {
    pub post_id: u64,
    pub post_type: PostType,
    pub score: i64,
    /// Set on answers only.
    pub parent_id: Option<u64>,
    pub owner_id: Option<u64>,
    /// Set on questions only.
    pub tags: BTreeSet<String>,
    pub title: Option<String>,
    /// Raw HTML.
    pub body: String,
}

/// Vote and frequency thresholds for dataset construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestParams {
    /// Questions need at least this score.
    pub min_question_score: i64,
    /// ... and at least one answer with at least this score.
    pub min_answer_score: i64,
    /// Tags must occur on at least this many retained questions.
    pub min_tag_count: usize,
    /// An answer with at least this score makes its owner an expert in the
    /// question's tags.
    pub expert_answer_score: i64,
    /// Prefix question bodies with their title.
    pub include_title: bool,
    /// Keep every answer of a retained question. When false only answers
    /// reaching `min_answer_score` become documents.
    pub keep_all_answers: bool,
}

impl Default for IngestParams {
    fn default() -> Self {
        IngestParams {
            min_question_score: 10,
            min_answer_score: 10,
            min_tag_count: 50,
            expert_answer_score: 10,
            include_title: true,
            keep_all_answers: true,
        }
    }
}

impl IngestParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("min_question_score", self.min_question_score),
            ("min_answer_score", self.min_answer_score),
            ("expert_answer_score", self.expert_answer_score),
        ] {
            if v < 0 {
                return Err(Error::Parameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Streaming reader over the `<row>` elements of a posts dump.
///
/// Rows whose `PostTypeId` is neither 1 (question) nor 2 (answer) are
/// skipped.
pub struct PostReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    done: bool,
    skipped: usize,
}

pub fn parse_posts<R: BufRead>(input: R) -> PostReader<R> {
    PostReader {
        reader: Reader::from_reader(input),
        buf: Vec::new(),
        done: false,
        skipped: 0,
    }
}

impl<R: BufRead> PostReader<R> {
    /// Rows skipped so far because of their post type.
    pub fn skipped_rows(&self) -> usize {
        self.skipped
    }

    fn xml_error(&self, message: impl Into<String>) -> Error {
        Error::Xml {
            offset: self.reader.buffer_position(),
            message: message.into(),
        }
    }

    fn decode_row(&self, row: &BytesStart<'_>) -> Result<Option<StackExchangePost>> {
        let mut fields: HashMap<&'static str, String> = HashMap::new();
        for attr in row.attributes() {
            let attr = attr.map_err(|e| self.xml_error(e.to_string()))?;
            let key = match attr.key.as_ref() {
                b"Id" => "Id",
                b"PostTypeId" => "PostTypeId",
                b"Score" => "Score",
                b"ParentId" => "ParentId",
                b"OwnerUserId" => "OwnerUserId",
                b"Tags" => "Tags",
                b"Title" => "Title",
                b"Body" => "Body",
                _ => continue,
            };
            let value = attr
                .unescape_value()
                .map_err(|e| self.xml_error(format!("attribute {key}: {e}")))?;
            fields.insert(key, value.into_owned());
        }

        let post_type = match fields.get("PostTypeId").map(String::as_str) {
            Some("1") => PostType::Question,
            Some("2") => PostType::Answer,
            Some(_) => return Ok(None),
            None => return Err(self.xml_error("row without PostTypeId")),
        };
        let int = |key: &str| -> Result<Option<i64>> {
            fields
                .get(key)
                .map(|v| {
                    v.trim()
                        .parse::<i64>()
                        .map_err(|_| self.xml_error(format!("attribute {key}={v:?} is not an integer")))
                })
                .transpose()
        };
        let id = |key: &str| -> Result<Option<u64>> {
            int(key)?
                .map(|v| u64::try_from(v).map_err(|_| self.xml_error(format!("attribute {key}={v} is negative"))))
                .transpose()
        };

        let post_id = id("Id")?.ok_or_else(|| self.xml_error("row without Id"))?;
        let parent_id = id("ParentId")?;
        if post_type == PostType::Answer && parent_id.is_none() {
            return Err(self.xml_error(format!("answer {post_id} has no ParentId")));
        }
        let tags = match post_type {
            PostType::Question => fields.get("Tags").map(|t| split_tags(t)).unwrap_or_default(),
            PostType::Answer => BTreeSet::new(),
        };
        Ok(Some(StackExchangePost {
            post_id,
            post_type,
            score: int("Score")?.unwrap_or(0),
            parent_id: if post_type == PostType::Answer { parent_id } else { None },
            owner_id: id("OwnerUserId")?,
            tags,
            title: fields.remove("Title"),
            body: fields.remove("Body").unwrap_or_default(),
        }))
    }
}

impl<R: BufRead> Iterator for PostReader<R> {
    type Item = Result<StackExchangePost>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(ev) => ev,
                Err(e) => {
                    self.done = true;
                    return Some(Err(Error::Xml {
                        offset: self.reader.error_position(),
                        message: e.to_string(),
                    }));
                }
            };
            let row = match event {
                Event::Eof => {
                    self.done = true;
                    return None;
                }
                Event::Start(e) | Event::Empty(e) if e.name().as_ref() == b"row" => e.into_owned(),
                _ => continue,
            };
            match self.decode_row(&row) {
                Ok(Some(post)) => return Some(Ok(post)),
                Ok(None) => self.skipped += 1,
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
        None
    }
}

/// Accepts both `<a><b>` and `|a|b|` tag encodings.
fn split_tags(raw: &str) -> BTreeSet<String> {
    raw.split(['<', '>', '|'])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

const BLOCK_TAGS: &[&str] = &[
    "p", "br", "div", "li", "ul", "ol", "pre", "blockquote", "h1", "h2", "h3", "h4", "h5", "h6", "hr", "tr",
    "td", "th", "table", "dd", "dt", "dl",
];

/// Reduces an HTML fragment to plain text.
///
/// Markup is removed (block elements become word breaks), entities are
/// decoded, code stays as text, and whitespace runs collapse to one space.
pub fn strip_html(body: &str) -> String {
    let mut text = String::with_capacity(body.len());
    let mut rest = body;
    while let Some(open) = rest.find('<') {
        text.push_str(&rest[..open]);
        let after = &rest[open..];
        if let Some(comment) = after.strip_prefix("<!--") {
            rest = match comment.find("-->") {
                Some(end) => &comment[end + 3..],
                None => "",
            };
            continue;
        }
        let Some(close) = after.find('>') else {
            // unterminated tag: keep the remainder as text
            text.push_str(after);
            rest = "";
            break;
        };
        let inner = &after[1..close];
        let name: String = inner
            .trim_start_matches('/')
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        if name.is_empty() {
            // "a < b" style text, not a tag
            text.push('<');
            rest = &after[1..];
            continue;
        }
        rest = &after[close + 1..];
        if (name == "script" || name == "style") && !inner.starts_with('/') {
            let end_tag = format!("</{name}");
            let lower = rest.to_ascii_lowercase();
            rest = match lower.find(&end_tag) {
                Some(pos) => match rest[pos..].find('>') {
                    Some(gt) => &rest[pos + gt + 1..],
                    None => "",
                },
                None => "",
            };
        }
        if BLOCK_TAGS.contains(&name.as_str()) {
            text.push(' ');
        }
    }
    text.push_str(rest);
    let decoded = html_escape::decode_html_entities(&text);
    decoded.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Counters collected while building a dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestLog {
    pub questions_read: usize,
    pub answers_read: usize,
    /// Answers without an owner, discarded before any filtering.
    pub ownerless_answers: usize,
    /// Answers whose parent question never appeared in the stream.
    pub orphan_answers: usize,
    pub retained_questions: usize,
    pub included_answers: usize,
}

struct QuestionRec {
    id: u64,
    tags: BTreeSet<String>,
    text: String,
}

struct AnswerRec {
    id: u64,
    parent: u64,
    owner: u64,
    score: i64,
    text: String,
}

/// Applies the vote and tag-frequency filters to a stream of posts.
///
/// Documents are retained questions, each followed by its answers, in stream
/// order. Answers link to their question (symmetric document links) and to
/// their owner (authorship). Labels are the retained tags.
pub fn build_stackexchange<I>(posts: I, params: &IngestParams) -> Result<(Dataset, IngestLog)>
where
    I: IntoIterator<Item = Result<StackExchangePost>>,
{
    params.validate()?;
    let mut log = IngestLog::default();
    let mut seen_questions: HashSet<u64> = HashSet::new();
    let mut questions: Vec<QuestionRec> = Vec::new();
    let mut answers: Vec<AnswerRec> = Vec::new();

    for post in posts {
        let post = post?;
        match post.post_type {
            PostType::Question => {
                log.questions_read += 1;
                seen_questions.insert(post.post_id);
                if post.score < params.min_question_score {
                    continue;
                }
                let body = strip_html(&post.body);
                let text = match post.title.as_deref().map(strip_html) {
                    Some(t) if params.include_title && !t.is_empty() => {
                        if body.is_empty() {
                            t
                        } else {
                            format!("{t} {body}")
                        }
                    }
                    _ => body,
                };
                questions.push(QuestionRec {
                    id: post.post_id,
                    tags: post.tags,
                    text,
                });
            }
            PostType::Answer => {
                log.answers_read += 1;
                let Some(owner) = post.owner_id else {
                    log.ownerless_answers += 1;
                    continue;
                };
                answers.push(AnswerRec {
                    id: post.post_id,
                    parent: post.parent_id.expect("answers carry a parent"),
                    owner,
                    score: post.score,
                    text: strip_html(&post.body),
                });
            }
        }
    }

    let candidate_questions: HashSet<u64> = questions.iter().map(|q| q.id).collect();
    let mut by_parent: HashMap<u64, Vec<&AnswerRec>> = HashMap::new();
    for a in &answers {
        if !seen_questions.contains(&a.parent) {
            log.orphan_answers += 1;
            continue;
        }
        if candidate_questions.contains(&a.parent) {
            by_parent.entry(a.parent).or_default().push(a);
        }
    }
    if log.orphan_answers > 0 {
        info!("dropped {} answers whose question is missing from the dump", log.orphan_answers);
    }

    let retained: Vec<(&QuestionRec, Vec<&AnswerRec>)> = questions
        .iter()
        .filter_map(|q| {
            let answers = by_parent.get(&q.id)?;
            if !answers.iter().any(|a| a.score >= params.min_answer_score) {
                return None;
            }
            let kept: Vec<&AnswerRec> = answers
                .iter()
                .copied()
                .filter(|a| params.keep_all_answers || a.score >= params.min_answer_score)
                .collect();
            Some((q, kept))
        })
        .collect();

    let mut tag_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (q, _) in &retained {
        for t in &q.tags {
            *tag_counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let label_names: Vec<String> = tag_counts
        .iter()
        .filter(|(_, &n)| n >= params.min_tag_count)
        .map(|(t, _)| t.to_string())
        .collect();
    let label_index: HashMap<&str, usize> = label_names.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    debug!("{} of {} tags kept as labels", label_names.len(), tag_counts.len());

    let mut documents = Vec::new();
    let mut doc_labels = Vec::new();
    let mut queries = Vec::new();
    let mut candidates: Vec<String> = Vec::new();
    let mut candidate_index: HashMap<u64, usize> = HashMap::new();
    let mut candidate_labels: Vec<BTreeSet<usize>> = Vec::new();
    let mut authorship = Vec::new();
    let mut links = Vec::new();

    for (q, answers) in &retained {
        let q_doc = documents.len();
        let labels: BTreeSet<usize> = q.tags.iter().filter_map(|t| label_index.get(t.as_str()).copied()).collect();
        documents.push(Document::new(q.id.to_string(), q.text.clone()));
        doc_labels.push(labels.clone());
        if !labels.is_empty() {
            queries.push(q_doc);
        }
        log.retained_questions += 1;
        for a in answers {
            let a_doc = documents.len();
            documents.push(Document::new(a.id.to_string(), a.text.clone()));
            doc_labels.push(BTreeSet::new());
            log.included_answers += 1;

            let c = *candidate_index.entry(a.owner).or_insert_with(|| {
                candidates.push(a.owner.to_string());
                candidate_labels.push(BTreeSet::new());
                candidates.len() - 1
            });
            authorship.push((a_doc, c, 1.0));
            links.push((q_doc, a_doc, 1.0));
            links.push((a_doc, q_doc, 1.0));
            if a.score >= params.expert_answer_score {
                candidate_labels[c].extend(labels.iter().copied());
            }
        }
    }

    let n_d = documents.len();
    let dataset = Dataset {
        a_dc: SparseMatrix::from_triplets(n_d, candidates.len(), authorship)?,
        a_dd: SparseMatrix::from_triplets(n_d, n_d, links)?,
        documents,
        candidates,
        label_names,
        doc_labels,
        candidate_labels,
        queries,
    };
    debug_assert!(dataset.validate().is_valid());
    Ok((dataset, log))
}
