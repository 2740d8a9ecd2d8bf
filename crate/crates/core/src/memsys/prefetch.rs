/// Stride prefetcher over a small table of miss streams.
///
/// Each training address is matched to the nearest stream whose last line is
/// within `WINDOW` lines; a repeated stride raises confidence, any other
/// stride resets it. At confidence 2 or more the next `degree` lines along the
/// stride are requested.
#[derive(Clone, Debug)]
pub struct Prefetcher {
    degree: u32,
    streams: Vec<Stream>,
    clock: u64,
}

/// State of one tracked stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stream {
    pub last_line: i64,
    pub stride_lines: i64,
    pub confidence: u8,
    last_used: u64,
}

const STREAMS: usize = 4;
const WINDOW: i64 = 16;

impl Prefetcher {
    pub fn new(degree: u32) -> Self {
        Prefetcher { degree, streams: Vec::with_capacity(STREAMS), clock: 0 }
    }

    pub fn streams(&self) -> &[Stream] {
        &self.streams
    }

    /// Trains on a demand access to line number `line` and returns candidate
    /// line numbers to prefetch (not yet filtered against cache contents).
    pub fn train(&mut self, line: i64) -> Vec<i64> {
        self.clock += 1;
        let near = self
            .streams
            .iter()
            .enumerate()
            .filter(|(_, s)| s.last_line != line && (line - s.last_line).abs() <= WINDOW)
            .min_by_key(|(_, s)| (line - s.last_line).abs())
            .map(|(i, _)| i);
        let Some(i) = near else {
            let fresh = Stream { last_line: line, stride_lines: 0, confidence: 0, last_used: self.clock };
            if self.streams.len() < STREAMS {
                self.streams.push(fresh);
            } else {
                let lru = (0..STREAMS).min_by_key(|&i| self.streams[i].last_used).unwrap();
                self.streams[lru] = fresh;
            }
            return Vec::new();
        };
        let s = &mut self.streams[i];
        let stride = line - s.last_line;
        if stride == s.stride_lines {
            s.confidence = (s.confidence + 1).min(3);
        } else {
            s.confidence = 0;
            s.stride_lines = stride;
        }
        s.last_line = line;
        s.last_used = self.clock;
        if s.confidence >= 2 {
            (1..=self.degree as i64).map(|k| line + k * stride).collect()
        } else {
            Vec::new()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_stream_needs_two_confirmations() {
        let mut p = Prefetcher::new(2);
        assert!(p.train(100).is_empty());
        assert!(p.train(101).is_empty());
        assert!(p.train(102).is_empty());
        assert_eq!(p.train(103), vec![104, 105]);
    }

    #[test]
    fn stride_change_resets_confidence() {
        let mut p = Prefetcher::new(2);
        for l in [0, 2, 4, 6] {
            p.train(l);
        }
        assert_eq!(p.streams()[0].confidence, 2);
        assert!(p.train(9).is_empty());
        assert_eq!(p.streams()[0].confidence, 0);
        assert_eq!(p.streams()[0].stride_lines, 3);
    }

    #[test]
    fn interleaved_streams_train_independently() {
        let mut p = Prefetcher::new(1);
        let mut issued = Vec::new();
        for i in 0..6 {
            issued.extend(p.train(1000 + i));
            issued.extend(p.train(5000 + i));
        }
        assert!(issued.contains(&1006) && issued.contains(&5006));
    }
}
