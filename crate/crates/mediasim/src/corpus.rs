//! Tweet archive ingestion, text normalization, and outlet-activity filtering.
//!
//! Archives are newline-delimited JSON records (`id`, `outlet`, `ts`, `text`,
//! optional `rt`). Normalization lowercases, deletes URLs, strips punctuation,
//! and drops stopwords, @-mentions, and the bare retweet marker.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use chrono::NaiveDate;
use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One normalized post record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub outlet: String,
    /// UTC seconds since the epoch.
    pub timestamp: i64,
    pub text: String,
    pub is_retweet: bool,
}

/// A normalized tweet: tokens plus the calendar day it falls on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenDoc {
    pub id: String,
    pub outlet: String,
    pub timestamp: i64,
    pub day: NaiveDate,
    pub tokens: Vec<String>,
    pub is_retweet: bool,
}

/// Raw tweet collection over a fixed date window.
#[derive(Debug, Clone)]
pub struct Corpus {
    tweets: Vec<Tweet>,
    window: (NaiveDate, NaiveDate),
    outlets: BTreeSet<String>,
}

/// Tokenized collection, ready for the similarity metrics.
#[derive(Debug, Clone)]
pub struct NormalizedCorpus {
    pub docs: Vec<TokenDoc>,
    pub window: (NaiveDate, NaiveDate),
    pub outlets: BTreeSet<String>,
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    outlet: Option<String>,
    ts: Option<i64>,
    text: Option<String>,
    #[serde(default)]
    rt: Option<u8>,
}

/// Parse one archive line into a [`Tweet`].
///
/// The retweet flag is set when the record carries `rt: 1` or the text
/// begins with the conventional `RT @` marker.
pub fn parse_tweet_record(line: &str) -> Result<Tweet> {
    let raw: RawRecord =
        serde_json::from_str(line).map_err(|e| Error::Parse(format!("bad record: {e}")))?;
    let id = match raw.id {
        Some(id) if !id.is_empty() => id,
        _ => return Err(Error::Parse("id missing".into())),
    };
    let outlet = match raw.outlet {
        Some(o) if !o.is_empty() => o,
        _ => return Err(Error::Parse("outlet missing".into())),
    };
    let timestamp = raw.ts.ok_or_else(|| Error::Parse("ts missing".into()))?;
    let text = raw.text.ok_or_else(|| Error::Parse("text missing".into()))?;
    let flagged = matches!(raw.rt, Some(1));
    let marker = text.trim_start().to_lowercase().starts_with("rt @");
    Ok(Tweet {
        id,
        outlet,
        timestamp,
        text,
        is_retweet: flagged || marker,
    })
}

/// Read a whole newline-delimited archive, rejecting duplicate ids.
pub fn read_tweet_archive<R: BufRead>(reader: R) -> Result<Vec<Tweet>> {
    let mut seen = HashSet::new();
    let mut tweets = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let tweet = parse_tweet_record(&line)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if !seen.insert(tweet.id.clone()) {
            return Err(Error::DuplicateId(tweet.id));
        }
        tweets.push(tweet);
    }
    Ok(tweets)
}

impl Corpus {
    /// Build a corpus, enforcing id uniqueness and the window invariant.
    pub fn from_tweets(tweets: Vec<Tweet>, window: (NaiveDate, NaiveDate)) -> Result<Self> {
        if window.1 < window.0 {
            return Err(Error::InvalidArgument(format!(
                "window end {} precedes start {}",
                window.1, window.0
            )));
        }
        let mut seen = HashSet::new();
        let mut outlets = BTreeSet::new();
        for t in &tweets {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::DuplicateId(t.id.clone()));
            }
            let day = utc_day(t.timestamp, 0);
            if day < window.0 || day > window.1 {
                return Err(Error::OutsideWindow {
                    id: t.id.clone(),
                    ts: t.timestamp,
                    start: window.0,
                    end: window.1,
                });
            }
            outlets.insert(t.outlet.clone());
        }
        Ok(Corpus {
            tweets,
            window,
            outlets,
        })
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn window(&self) -> (NaiveDate, NaiveDate) {
        self.window
    }

    pub fn outlets(&self) -> &BTreeSet<String> {
        &self.outlets
    }

    /// Inclusive window length in days.
    pub fn window_days(&self) -> i64 {
        (self.window.1 - self.window.0).num_days() + 1
    }

    /// Drop outlets averaging less than one tweet per day over the window.
    ///
    /// Returns the reduced corpus and the removed handles. Outlets posting
    /// exactly one tweet per day are retained (the bound is strict).
    pub fn filter_active_outlets(&self) -> (Corpus, Vec<String>) {
        let days = self.window_days() as f64;
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for t in &self.tweets {
            *counts.entry(t.outlet.as_str()).or_default() += 1;
        }
        let removed: BTreeSet<String> = self
            .outlets
            .iter()
            .filter(|o| {
                let n = counts.get(o.as_str()).copied().unwrap_or(0) as f64;
                n / days < 1.0
            })
            .cloned()
            .collect();
        let tweets: Vec<Tweet> = self
            .tweets
            .iter()
            .filter(|t| !removed.contains(&t.outlet))
            .cloned()
            .collect();
        let outlets: BTreeSet<String> =
            self.outlets.difference(&removed).cloned().collect();
        (
            Corpus {
                tweets,
                window: self.window,
                outlets,
            },
            removed.into_iter().collect(),
        )
    }

    /// Tokenize every tweet. `day_offset_hours` shifts the day boundary away
    /// from midnight UTC.
    pub fn normalize(&self, normalizer: &Normalizer, day_offset_hours: i32) -> NormalizedCorpus {
        let docs = self
            .tweets
            .iter()
            .map(|t| TokenDoc {
                id: t.id.clone(),
                outlet: t.outlet.clone(),
                timestamp: t.timestamp,
                day: utc_day(t.timestamp, day_offset_hours),
                tokens: normalizer.normalize(&t.text),
                is_retweet: t.is_retweet,
            })
            .collect();
        NormalizedCorpus {
            docs,
            window: self.window,
            outlets: self.outlets.clone(),
        }
    }
}

impl NormalizedCorpus {
    /// Inclusive window length in days.
    pub fn window_days(&self) -> i64 {
        (self.window.1 - self.window.0).num_days() + 1
    }

    /// Bucket docs by calendar day. Every doc lands in exactly one bucket.
    pub fn partition_by_day(&self) -> BTreeMap<NaiveDate, Vec<&TokenDoc>> {
        let mut buckets: BTreeMap<NaiveDate, Vec<&TokenDoc>> = BTreeMap::new();
        for doc in &self.docs {
            buckets.entry(doc.day).or_default().push(doc);
        }
        buckets
    }

    /// Drop retweets whose token sequence duplicates an earlier tweet.
    /// Docs are scanned in (timestamp, id) order, so the original survives.
    pub fn dedup_retweets(&self) -> NormalizedCorpus {
        let mut order: Vec<&TokenDoc> = self.docs.iter().collect();
        order.sort_by(|a, b| (a.timestamp, &a.id).cmp(&(b.timestamp, &b.id)));
        let mut seen: HashSet<String> = HashSet::new();
        let mut keep: HashSet<&str> = HashSet::new();
        for doc in order {
            let key = doc.tokens.join(" ");
            if doc.is_retweet && seen.contains(&key) {
                continue;
            }
            seen.insert(key);
            keep.insert(doc.id.as_str());
        }
        let docs: Vec<TokenDoc> = self
            .docs
            .iter()
            .filter(|d| keep.contains(d.id.as_str()))
            .cloned()
            .collect();
        NormalizedCorpus {
            docs,
            window: self.window,
            outlets: self.outlets.clone(),
        }
    }
}

/// Calendar day of a UTC timestamp, with the day boundary shifted by
/// `offset_hours`.
pub fn utc_day(timestamp: i64, offset_hours: i32) -> NaiveDate {
    let shifted = timestamp + i64::from(offset_hours) * 3600;
    chrono::DateTime::from_timestamp(shifted, 0)
        .expect("timestamp representable")
        .date_naive()
}

static URL_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"https?://\S+|\bwww\.\S+|\bt\.co/\S+").expect("valid regex"));

/// Text normalization rules: lowercase, URLs deleted, punctuation stripped,
/// whitespace tokenization, then stopword/mention/retweet-marker removal.
#[derive(Debug, Clone)]
pub struct Normalizer {
    stopwords: HashSet<String>,
    pub strip_mentions: bool,
    pub strip_rt_marker: bool,
}

impl Normalizer {
    pub fn new(stopwords: HashSet<String>) -> Self {
        Normalizer {
            stopwords: stopwords.into_iter().map(|s| s.to_lowercase()).collect(),
            strip_mentions: true,
            strip_rt_marker: true,
        }
    }

    /// The bundled Spanish stopword list.
    pub fn default_spanish() -> Self {
        let list = include_str!("../assets/stopwords_es.txt");
        Self::new(
            list.lines()
                .map(|l| l.trim().to_string())
                .filter(|l| !l.is_empty())
                .collect(),
        )
    }

    /// One stopword per line, UTF-8.
    pub fn from_stopword_file(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path)?;
        Ok(Self::new(
            content
                .lines()
                .map(|l| l.trim().to_string())
                .filter(|l| !l.is_empty())
                .collect(),
        ))
    }

    pub fn no_stopwords() -> Self {
        Self::new(HashSet::new())
    }

    pub fn normalize(&self, raw: &str) -> Vec<String> {
        let lowered = raw.to_lowercase();
        let no_urls = URL_RE.replace_all(&lowered, " ");
        let mut out = Vec::new();
        for piece in no_urls.split_whitespace() {
            if self.strip_mentions && is_mention(piece) {
                continue;
            }
            let token: String = piece.chars().filter(|c| c.is_alphanumeric()).collect();
            if token.is_empty() {
                continue;
            }
            if self.strip_rt_marker && token == "rt" {
                continue;
            }
            if self.stopwords.contains(&token) {
                continue;
            }
            out.push(token);
        }
        out
    }
}

fn is_mention(piece: &str) -> bool {
    piece
        .trim_start_matches(|c: char| !c.is_alphanumeric() && c != '@')
        .starts_with('@')
}
