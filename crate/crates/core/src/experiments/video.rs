//! Per-video decisions from per-frame predictions.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classify::{Classifier, Label};
use crate::dataset::FeatureCache;
use crate::numfmt;
use crate::{Error, Result};

/// Majority label per group, ordered by group id. An exact tie goes to
/// [`Label::Real`].
pub fn video_majority_vote(frames: &[(Option<String>, Label)]) -> Result<Vec<(String, Label)>> {
    if frames.is_empty() {
        return Err(Error::Validation("no frame predictions to vote on".into()));
    }
    let mut votes: BTreeMap<&str, [usize; 2]> = BTreeMap::new();
    for (i, (group, label)) in frames.iter().enumerate() {
        let group = group
            .as_deref()
            .ok_or_else(|| Error::Validation(format!("frame {i} has no group")))?;
        votes.entry(group).or_default()[label.index()] += 1;
    }
    Ok(votes
        .into_iter()
        .map(|(g, v)| (g.to_string(), majority(v)))
        .collect())
}

fn majority(votes: [usize; 2]) -> Label {
    if votes[Label::Fake.index()] > votes[Label::Real.index()] {
        Label::Fake
    } else {
        Label::Real
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoOutcome {
    pub group: String,
    pub actual: Label,
    pub predicted: Label,
    pub frames: usize,
    pub correct_frames: usize,
}

/// Frame-level and video-level scores of one model on one set of frames.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoEvaluation {
    pub frame_accuracy: f64,
    pub video_accuracy: f64,
    pub videos: Vec<VideoOutcome>,
}

impl VideoEvaluation {
    /// Scores predictions against ground truth. A video's true label is the
    /// majority of its frames' true labels.
    pub fn from_predictions(frames: &[(Option<String>, Label, Label)]) -> Result<VideoEvaluation> {
        let truth: Vec<_> = frames.iter().map(|(g, a, _)| (g.clone(), *a)).collect();
        let guess: Vec<_> = frames.iter().map(|(g, _, p)| (g.clone(), *p)).collect();
        let actual = video_majority_vote(&truth)?;
        let predicted = video_majority_vote(&guess)?;

        let mut tally: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for (g, a, p) in frames {
            let t = tally
                .entry(g.as_deref().expect("checked by vote"))
                .or_default();
            t.0 += 1;
            t.1 += usize::from(a == p);
        }
        let videos: Vec<VideoOutcome> = actual
            .into_iter()
            .zip(predicted)
            .map(|((group, actual), (_, predicted))| {
                let (frames, correct_frames) = tally[group.as_str()];
                VideoOutcome {
                    group,
                    actual,
                    predicted,
                    frames,
                    correct_frames,
                }
            })
            .collect();
        let correct_frames: usize = videos.iter().map(|v| v.correct_frames).sum();
        let correct_videos = videos.iter().filter(|v| v.actual == v.predicted).count();
        Ok(VideoEvaluation {
            frame_accuracy: correct_frames as f64 / frames.len() as f64,
            video_accuracy: correct_videos as f64 / videos.len() as f64,
            videos,
        })
    }

    /// Runs `model` over every row of `cache`; rows must all carry a group.
    pub fn of_model<C: Classifier + ?Sized>(model: &C, cache: &FeatureCache) -> Result<Self> {
        let frames = cache
            .rows
            .iter()
            .map(|r| Ok((r.group.clone(), r.label, model.predict(&r.features)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_predictions(&frames)
    }

    /// `videos.csv`: `group,actual,predicted,frames,correct_frames`.
    pub fn write_csv<W: Write>(&self, mut out: W, echo: &[String]) -> std::io::Result<()> {
        for line in echo {
            writeln!(out, "# {line}")?;
        }
        writeln!(
            out,
            "# frame_accuracy={}",
            numfmt::real(self.frame_accuracy)
        )?;
        writeln!(
            out,
            "# video_accuracy={}",
            numfmt::real(self.video_accuracy)
        )?;
        writeln!(out, "group,actual,predicted,frames,correct_frames")?;
        for v in &self.videos {
            writeln!(
                out,
                "{},{},{},{},{}",
                v.group,
                v.actual.as_u8(),
                v.predicted.as_u8(),
                v.frames,
                v.correct_frames
            )?;
        }
        Ok(())
    }
}

/// One seeded trial of frame-label noise: `groups` videos of
/// `frames_per_group` frames, alternately real and fake, with exactly
/// `round(noise * total)` frame predictions flipped at random.
pub fn label_noise_trial(
    groups: usize,
    frames_per_group: usize,
    noise: f64,
    seed: u64,
) -> Result<VideoEvaluation> {
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::Parameter(format!(
            "noise rate {noise} outside [0, 1]"
        )));
    }
    let total = groups * frames_per_group;
    let mut frames: Vec<(Option<String>, Label, Label)> = (0..total)
        .map(|i| {
            let g = i / frames_per_group;
            let label = if g.is_multiple_of(2) {
                Label::Real
            } else {
                Label::Fake
            };
            (Some(format!("v{g:04}")), label, label)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flips = (noise * total as f64).round() as usize;
    for i in index::sample(&mut rng, total, flips) {
        let f = &mut frames[i];
        f.2 = if f.1 == Label::Real {
            Label::Fake
        } else {
            Label::Real
        };
    }
    VideoEvaluation::from_predictions(&frames)
}
