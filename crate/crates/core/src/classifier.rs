//! Classifier abstraction, deterministic built-ins and the external
//! subprocess protocol.
//!
//! External classifiers speak line-delimited JSON over stdin/stdout. The child
//! first announces `{"ready": true, "classes": K}`; every request
//! `{"id", "width", "height", "channels", "pixels"}` (pixels base64-encoded)
//! is answered by `{"id", "label"}` before the next one is sent.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, ExitStatus, Stdio};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub trait Classifier: Send + Sync {
    fn classify(&self, image: &Image) -> Result<Label>;

    /// Number of classes; every label is below it.
    fn classes(&self) -> u32;

    /// Whether `classify` may be called from several threads at once
    /// without serializing internally.
    fn concurrent(&self) -> bool {
        true
    }
}

impl<C: Classifier + ?Sized> Classifier for &C {
    fn classify(&self, image: &Image) -> Result<Label> {
        (**self).classify(image)
    }

    fn classes(&self) -> u32 {
        (**self).classes()
    }

    fn concurrent(&self) -> bool {
        (**self).concurrent()
    }
}

impl<C: Classifier + ?Sized> Classifier for Box<C> {
    fn classify(&self, image: &Image) -> Result<Label> {
        (**self).classify(image)
    }

    fn classes(&self) -> u32 {
        (**self).classes()
    }

    fn concurrent(&self) -> bool {
        (**self).concurrent()
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Digest of an image's raw sample buffer, the lookup-table key.
pub fn image_digest(image: &Image) -> u64 {
    fnv1a64(image.pixels())
}

/// Buckets the global sample mean: the label is the number of thresholds the
/// mean reaches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanThreshold {
    thresholds: Vec<u32>,
}

impl MeanThreshold {
    pub fn new(thresholds: Vec<u32>) -> Result<Self> {
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Classifier("thresholds must be strictly increasing".into()));
        }
        Ok(Self { thresholds })
    }

    pub fn thresholds(&self) -> &[u32] {
        &self.thresholds
    }
}

impl Classifier for MeanThreshold {
    fn classify(&self, image: &Image) -> Result<Label> {
        let sum: u64 = image.pixels().iter().map(|&v| u64::from(v)).sum();
        let count = image.pixels().len() as u64;
        // mean >= t  <=>  sum >= t * count, kept in integers
        let label = self
            .thresholds
            .iter()
            .take_while(|&&t| sum >= u64::from(t) * count)
            .count();
        Ok(Label(label as u32))
    }

    fn classes(&self) -> u32 {
        self.thresholds.len() as u32 + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constant {
    label: Label,
    classes: u32,
}

impl Constant {
    pub fn new(label: Label, classes: u32) -> Result<Self> {
        if label.0 >= classes {
            return Err(Error::Classifier(format!("label {label} not below class count {classes}")));
        }
        Ok(Self { label, classes })
    }
}

impl Classifier for Constant {
    fn classify(&self, _image: &Image) -> Result<Label> {
        Ok(self.label)
    }

    fn classes(&self) -> u32 {
        self.classes
    }
}

/// Exact-bytes lookup keyed by [`image_digest`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LookupDoc", into = "LookupDoc")]
pub struct LookupTable {
    table: BTreeMap<u64, Label>,
    default: Label,
    classes: u32,
}

#[derive(Serialize, Deserialize)]
struct LookupDoc {
    classes: u32,
    default: Label,
    table: BTreeMap<String, Label>,
}

impl TryFrom<LookupDoc> for LookupTable {
    type Error = Error;

    fn try_from(doc: LookupDoc) -> Result<Self> {
        let mut t = LookupTable::new(doc.default, doc.classes)?;
        for (key, label) in doc.table {
            let digest = u64::from_str_radix(&key, 16)
                .map_err(|_| Error::Classifier(format!("bad digest key {key:?}")))?;
            t.insert_digest(digest, label)?;
        }
        Ok(t)
    }
}

impl From<LookupTable> for LookupDoc {
    fn from(t: LookupTable) -> Self {
        LookupDoc {
            classes: t.classes,
            default: t.default,
            table: t.table.iter().map(|(d, l)| (format!("{d:016x}"), *l)).collect(),
        }
    }
}

impl LookupTable {
    pub fn new(default: Label, classes: u32) -> Result<Self> {
        if default.0 >= classes {
            return Err(Error::Classifier(format!("default {default} not below class count {classes}")));
        }
        Ok(Self { table: BTreeMap::new(), default, classes })
    }

    pub fn insert_digest(&mut self, digest: u64, label: Label) -> Result<Option<Label>> {
        if label.0 >= self.classes {
            return Err(Error::Classifier(format!("label {label} not below class count {}", self.classes)));
        }
        Ok(self.table.insert(digest, label))
    }

    pub fn insert(&mut self, image: &Image, label: Label) -> Result<Option<Label>> {
        self.insert_digest(image_digest(image), label)
    }

    pub fn get(&self, digest: u64) -> Option<Label> {
        self.table.get(&digest).copied()
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl Classifier for LookupTable {
    fn classify(&self, image: &Image) -> Result<Label> {
        Ok(self.get(image_digest(image)).unwrap_or(self.default))
    }

    fn classes(&self) -> u32 {
        self.classes
    }
}

pub const DEFAULT_EXTERNAL_TIMEOUT_MS: u64 = 30_000;

/// Serializable description of a classifier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    MeanThreshold { thresholds: Vec<u32> },
    LookupTable { table: LookupTable },
    Constant { label: Label, classes: u32 },
    External { command: Vec<String>, timeout_ms: u64 },
}

impl ClassifierSpec {
    pub fn instantiate(&self) -> Result<Box<dyn Classifier>> {
        Ok(match self {
            ClassifierSpec::MeanThreshold { thresholds } => Box::new(MeanThreshold::new(thresholds.clone())?),
            ClassifierSpec::LookupTable { table } => Box::new(table.clone()),
            ClassifierSpec::Constant { label, classes } => Box::new(Constant::new(*label, *classes)?),
            ClassifierSpec::External { command, timeout_ms } => {
                Box::new(ExternalClassifier::spawn(command, Duration::from_millis(*timeout_ms))?)
            }
        })
    }
}

/// Parses the command-line shorthand:
/// `constant:LABEL[:CLASSES]`, `mean-threshold:T1,T2,...`,
/// `lookup:PATH.json` and `external:PROGRAM [ARGS...]`.
impl FromStr for ClassifierSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Classifier(format!("classifier {s:?}: {why}"));
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad("expected KIND:ARGS"))?;
        match kind {
            "constant" => {
                let mut parts = rest.split(':');
                let label: u32 = parts.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad label"))?;
                let classes = match parts.next() {
                    Some(v) => v.parse().map_err(|_| bad("bad class count"))?,
                    None => (label + 1).max(2),
                };
                Ok(ClassifierSpec::Constant { label: Label(label), classes })
            }
            "mean-threshold" => {
                let thresholds = rest
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| t.trim().parse().map_err(|_| bad("bad threshold")))
                    .collect::<Result<Vec<u32>>>()?;
                MeanThreshold::new(thresholds.clone())?;
                Ok(ClassifierSpec::MeanThreshold { thresholds })
            }
            "lookup" => {
                let text = std::fs::read_to_string(rest)?;
                Ok(ClassifierSpec::LookupTable { table: serde_json::from_str(&text)? })
            }
            "external" => {
                let command: Vec<String> = rest.split_whitespace().map(str::to_owned).collect();
                if command.is_empty() {
                    return Err(bad("empty command"));
                }
                Ok(ClassifierSpec::External { command, timeout_ms: DEFAULT_EXTERNAL_TIMEOUT_MS })
            }
            _ => Err(bad("unknown kind")),
        }
    }
}

/// Classifies every image in order; the first failure aborts with its index.
pub fn classify_batch<C: Classifier + ?Sized>(classifier: &C, images: &[Image]) -> Result<Vec<Label>> {
    images
        .iter()
        .enumerate()
        .map(|(index, img)| {
            classifier
                .classify(img)
                .map_err(|e| Error::AtIndex { index, source: Box::new(e) })
        })
        .collect()
}

/// Counts forward passes through the wrapped classifier.
pub struct CallCounter<C> {
    inner: C,
    calls: AtomicU64,
}

impl<C: Classifier> CallCounter<C> {
    pub fn new(inner: C) -> Self {
        Self { inner, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::SeqCst);
    }

    pub fn into_inner(self) -> C {
        self.inner
    }
}

impl<C: Classifier> Classifier for CallCounter<C> {
    fn classify(&self, image: &Image) -> Result<Label> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.classify(image)
    }

    fn classes(&self) -> u32 {
        self.inner.classes()
    }

    fn concurrent(&self) -> bool {
        self.inner.concurrent()
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct Request {
    pub id: u64,
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub pixels: String,
}

#[derive(Deserialize)]
struct Response {
    id: u64,
    label: Option<i64>,
    error: Option<String>,
}

#[derive(Deserialize)]
struct Handshake {
    ready: bool,
    classes: u32,
}

const TRANSCRIPT_LINES: usize = 16;

struct ExternalProcess {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    transcript: Vec<String>,
    dead: bool,
}

impl ExternalProcess {
    fn note(&mut self, line: String) {
        let mut line = line;
        if line.len() > 200 {
            let mut cut = 200;
            while !line.is_char_boundary(cut) {
                cut -= 1;
            }
            line.truncate(cut);
            line.push_str("...");
        }
        self.transcript.push(line);
        if self.transcript.len() > TRANSCRIPT_LINES {
            self.transcript.remove(0);
        }
    }

    fn fail(&mut self, message: impl Into<String>) -> Error {
        self.dead = true;
        let _ = self.child.kill();
        Error::Protocol { message: message.into(), transcript: self.transcript.join("\n") }
    }

    fn read_line(&mut self, timeout: Duration) -> Result<String> {
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => {
                self.note(format!("< {line}"));
                Ok(line)
            }
            Ok(Err(e)) => Err(self.fail(format!("reading child output: {e}"))),
            Err(RecvTimeoutError::Timeout) => Err(self.fail(format!("no response within {timeout:?}"))),
            Err(RecvTimeoutError::Disconnected) => Err(self.fail("child closed its output")),
        }
    }
}

/// A classifier living in a child process.
pub struct ExternalClassifier {
    process: Mutex<ExternalProcess>,
    classes: u32,
    timeout: Duration,
}

impl ExternalClassifier {
    pub fn spawn(command: &[String], timeout: Duration) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::Classifier("empty external command".into()))?;
        if timeout.is_zero() {
            return Err(Error::Classifier("external timeout must be positive".into()));
        }
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Classifier(format!("spawning {program:?}: {e}")))?;
        let stdout = child.stdout.take().expect("stdout is piped");
        let stdin = child.stdin.take();
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut process = ExternalProcess {
            child,
            stdin,
            lines: rx,
            next_id: 0,
            transcript: Vec::new(),
            dead: false,
        };
        let line = process.read_line(timeout)?;
        let classes = match serde_json::from_str::<Handshake>(&line) {
            Ok(Handshake { ready: true, classes }) if classes >= 1 => classes,
            _ => return Err(process.fail("expected handshake {\"ready\": true, \"classes\": K}")),
        };
        Ok(Self { process: Mutex::new(process), classes, timeout })
    }

    /// Closes the child's input and waits for it to exit, killing it after
    /// the timeout.
    pub fn shutdown(mut self) -> Result<ExitStatus> {
        let timeout = self.timeout;
        let p = self.process.get_mut().unwrap_or_else(|e| e.into_inner());
        close_and_wait(p, timeout)
    }
}

fn close_and_wait(p: &mut ExternalProcess, timeout: Duration) -> Result<ExitStatus> {
    drop(p.stdin.take());
    let deadline = Instant::now() + timeout;
    loop {
        if let Some(status) = p.child.try_wait()? {
            return Ok(status);
        }
        if Instant::now() >= deadline {
            let _ = p.child.kill();
            let _ = p.child.wait();
            return Err(Error::Classifier(format!("child did not exit within {timeout:?}")));
        }
        thread::sleep(Duration::from_millis(5));
    }
}

impl Drop for ExternalClassifier {
    fn drop(&mut self) {
        if let Ok(p) = self.process.get_mut() {
            if p.stdin.is_some() {
                let _ = close_and_wait(p, self.timeout);
            }
        }
    }
}

impl Classifier for ExternalClassifier {
    fn classify(&self, image: &Image) -> Result<Label> {
        let mut p = self.process.lock().unwrap_or_else(|e| e.into_inner());
        if p.dead {
            return Err(Error::Classifier("external classifier already failed".into()));
        }
        let id = p.next_id;
        p.next_id += 1;
        let request = serde_json::to_string(&Request {
            id,
            width: image.width(),
            height: image.height(),
            channels: image.channels(),
            pixels: BASE64.encode(image.pixels()),
        })?;
        p.note(format!("> {request}"));
        let sent = match p.stdin.as_mut() {
            Some(stdin) => writeln!(stdin, "{request}").and_then(|_| stdin.flush()),
            None => Err(std::io::ErrorKind::BrokenPipe.into()),
        };
        if let Err(e) = sent {
            return Err(p.fail(format!("writing request: {e}")));
        }
        let line = p.read_line(self.timeout)?;
        let response: Response = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => return Err(p.fail(format!("malformed response: {e}"))),
        };
        if response.id != id {
            return Err(p.fail(format!("response id {} does not match request id {id}", response.id)));
        }
        if let Some(err) = response.error {
            return Err(p.fail(format!("child reported error: {err}")));
        }
        match response.label {
            Some(l) if (0..i64::from(self.classes)).contains(&l) => Ok(Label(l as u32)),
            Some(l) => Err(p.fail(format!("label {l} outside declared {} classes", self.classes))),
            None => Err(p.fail("response carries neither label nor error")),
        }
    }

    fn classes(&self) -> u32 {
        self.classes
    }

    fn concurrent(&self) -> bool {
        false
    }
}

/// Serves `classifier` over the external protocol until `input` closes.
///
/// A request line that cannot be decoded is answered with an `error` object
/// when its id is recoverable; otherwise serving stops with an error.
pub fn serve<C: Classifier + ?Sized>(classifier: &C, input: impl BufRead, mut output: impl Write) -> Result<()> {
    writeln!(output, "{}", serde_json::json!({"ready": true, "classes": classifier.classes()}))?;
    output.flush()?;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match decode_request(&line) {
            Ok((id, image)) => match classifier.classify(&image) {
                Ok(label) => serde_json::json!({"id": id, "label": label.0}),
                Err(e) => serde_json::json!({"id": id, "error": e.to_string()}),
            },
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(&line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(|id| id.as_u64()));
                match id {
                    Some(id) => serde_json::json!({"id": id, "error": e.to_string()}),
                    None => return Err(Error::Classifier(format!("unparseable request: {e}"))),
                }
            }
        };
        writeln!(output, "{reply}")?;
        output.flush()?;
    }
    Ok(())
}

fn decode_request(line: &str) -> Result<(u64, Image)> {
    let req: Request = serde_json::from_str(line)?;
    let pixels = BASE64
        .decode(req.pixels.as_bytes())
        .map_err(|e| Error::Classifier(format!("bad base64: {e}")))?;
    Ok((req.id, Image::new(req.width, req.height, req.channels, pixels)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x8594_4171_f739_67e8);
    }

    #[test]
    fn constant_label() {
        let c: ClassifierSpec = "constant:7".parse().unwrap();
        let c = c.instantiate().unwrap();
        assert_eq!(c.classify(&Image::filled(3, 3, 1, 0).unwrap()).unwrap(), Label(7));
        assert_eq!(c.classes(), 8);
        assert!(Constant::new(Label(3), 3).is_err());
    }

    #[test]
    fn mean_threshold_buckets() {
        let c = MeanThreshold::new(vec![64, 128, 192]).unwrap();
        let label = |v: u8| c.classify(&Image::filled(4, 4, 3, v).unwrap()).unwrap();
        assert_eq!(label(100), Label(1));
        assert_eq!(label(0), Label(0));
        assert_eq!(label(63), Label(0));
        assert_eq!(label(64), Label(1));
        assert_eq!(label(192), Label(3));
        assert_eq!(c.classes(), 4);
        // mean 63.5 stays below 64
        let img = Image::new(2, 1, 1, vec![63, 64]).unwrap();
        assert_eq!(c.classify(&img).unwrap(), Label(0));
        assert!(MeanThreshold::new(vec![5, 5]).is_err());
    }

    #[test]
    fn lookup_by_exact_bytes() {
        let a = Image::filled(2, 2, 1, 1).unwrap();
        let b = Image::filled(2, 2, 1, 2).unwrap();
        let mut t = LookupTable::new(Label(0), 3).unwrap();
        t.insert(&a, Label(2)).unwrap();
        assert_eq!(t.classify(&a).unwrap(), Label(2));
        assert_eq!(t.classify(&b).unwrap(), Label(0));
        assert!(t.insert(&b, Label(3)).is_err());

        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains(&format!("{:016x}", image_digest(&a))));
        let back: LookupTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn batch_matches_single_calls() {
        let imgs = [20u8, 100, 250].map(|v| Image::filled(3, 2, 1, v).unwrap());
        let c = MeanThreshold::new(vec![64, 128, 192]).unwrap();
        assert_eq!(classify_batch(&c, &imgs).unwrap(), vec![Label(0), Label(1), Label(3)]);
        let k = Constant::new(Label(7), 8).unwrap();
        assert_eq!(classify_batch(&k, &imgs).unwrap(), vec![Label(7); 3]);
    }

    struct FailsOn(u8);

    impl Classifier for FailsOn {
        fn classify(&self, image: &Image) -> Result<Label> {
            if image.pixels()[0] == self.0 {
                Err(Error::Classifier("boom".into()))
            } else {
                Ok(Label(0))
            }
        }

        fn classes(&self) -> u32 {
            2
        }
    }

    #[test]
    fn batch_error_carries_index() {
        let imgs = [1u8, 2, 3].map(|v| Image::filled(1, 1, 1, v).unwrap());
        match classify_batch(&FailsOn(2), &imgs).unwrap_err() {
            Error::AtIndex { index, .. } => assert_eq!(index, 1),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn counter_counts() {
        let c = CallCounter::new(Constant::new(Label(1), 2).unwrap());
        let img = Image::filled(1, 1, 1, 0).unwrap();
        for _ in 0..5 {
            c.classify(&img).unwrap();
        }
        assert_eq!(c.calls(), 5);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(
            "mean-threshold:64,128,192".parse::<ClassifierSpec>().unwrap(),
            ClassifierSpec::MeanThreshold { thresholds: vec![64, 128, 192] }
        );
        assert_eq!(
            "constant:2:10".parse::<ClassifierSpec>().unwrap(),
            ClassifierSpec::Constant { label: Label(2), classes: 10 }
        );
        assert!("mean-threshold:9,3".parse::<ClassifierSpec>().is_err());
        assert!("neural:net".parse::<ClassifierSpec>().is_err());
        match "external:python3 adapter.py --mirror".parse::<ClassifierSpec>().unwrap() {
            ClassifierSpec::External { command, .. } => assert_eq!(command, ["python3", "adapter.py", "--mirror"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn serve_answers_in_order() {
        let c = MeanThreshold::new(vec![64, 128, 192]).unwrap();
        let img = Image::filled(2, 2, 3, 130).unwrap();
        let req = serde_json::to_string(&Request {
            id: 41,
            width: 2,
            height: 2,
            channels: 3,
            pixels: BASE64.encode(img.pixels()),
        })
        .unwrap();
        let input = format!("{req}\n{{\"id\": 42, \"width\": 1}}\n");
        let mut out = Vec::new();
        serve(&c, input.as_bytes(), &mut out).unwrap();
        let lines: Vec<serde_json::Value> = String::from_utf8(out)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines[0], serde_json::json!({"ready": true, "classes": 4}));
        assert_eq!(lines[1], serde_json::json!({"id": 41, "label": 2}));
        assert_eq!(lines[2]["id"], 42);
        assert!(lines[2]["error"].is_string());

        let mut out = Vec::new();
        assert!(serve(&c, "not json\n".as_bytes(), &mut out).is_err());
    }
}
