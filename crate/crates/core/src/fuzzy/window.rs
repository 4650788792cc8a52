use regex::Regex;
use serde::Serialize;

use super::FuzzyError;

/// Shortest observation span, in seconds.
pub const MIN_INTERVAL: f64 = 1e-3;

/// (x, t) observation for one metric with its normalization bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricWindow {
    pub metric: String,
    pub x_count: u64,
    pub t_interval: f64,
    pub x_bounds: (f64, f64),
    pub t_bounds: (f64, f64),
}

impl MetricWindow {
    pub fn normalized(&self) -> Result<(f64, f64), FuzzyError> {
        Ok((
            normalize(self.x_count as f64, self.x_bounds.0, self.x_bounds.1)?,
            normalize(self.t_interval, self.t_bounds.0, self.t_bounds.1)?,
        ))
    }
}

/// `(v - min) / (max - min)`, clamped to [0, 1].
// Negated comparisons below also reject NaN.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn normalize(v: f64, min: f64, max: f64) -> Result<f64, FuzzyError> {
    if !(min < max) {
        return Err(FuzzyError::Config(format!(
            "normalization bounds need min < max, got ({min}, {max})"
        )));
    }
    Ok(((v - min) / (max - min)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogEvent {
    pub timestamp: f64,
    pub session_id: String,
    pub text: String,
}

/// Number of events matching `pattern` with timestamp in `[start, start + length)`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn count_pattern(events: &[LogEvent], pattern: &Regex, start: f64, length: f64) -> Result<usize, FuzzyError> {
    if !(length > 0.0) {
        return Err(FuzzyError::Config(format!(
            "window length must be positive, got {length}"
        )));
    }
    let end = start + length;
    Ok(events
        .iter()
        .filter(|e| e.timestamp >= start && e.timestamp < end && pattern.is_match(&e.text))
        .count())
}

/// What to count for one metric and how to scale it.
#[derive(Debug, Clone)]
pub struct MetricSpec {
    pub name: String,
    pub pattern: Regex,
    pub x_bounds: (f64, f64),
    pub t_bounds: (f64, f64),
    pub window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedWindow {
    pub window: MetricWindow,
    pub start: f64,
    /// Last matching event, used to anchor alerts.
    pub last_event: Option<LogEvent>,
}

/// Tumbling windows for one metric, anchored at the first matching event.
#[derive(Debug, Clone)]
pub struct MetricStream {
    pub spec: MetricSpec,
    anchor: Option<f64>,
    events: Vec<LogEvent>,
}

impl MetricStream {
    pub fn new(spec: MetricSpec) -> Self {
        Self {
            spec,
            anchor: None,
            events: Vec::new(),
        }
    }

    /// Closes the window if `now` is past it, then records `event` if it matches.
    pub fn observe(&mut self, event: LogEvent) -> Option<ClosedWindow> {
        let closed = self.advance(event.timestamp);
        if self.spec.pattern.is_match(&event.text) {
            self.anchor.get_or_insert(event.timestamp);
            self.events.push(event);
        }
        closed
    }

    pub fn advance(&mut self, now: f64) -> Option<ClosedWindow> {
        let start = self.anchor?;
        if now < start + self.spec.window {
            return None;
        }
        self.close()
    }

    /// Closes the open window regardless of time.
    pub fn flush(&mut self) -> Option<ClosedWindow> {
        self.anchor?;
        self.close()
    }

    fn close(&mut self) -> Option<ClosedWindow> {
        let start = self.anchor.take()?;
        let events = std::mem::take(&mut self.events);
        let x_count = count_pattern(&events, &self.spec.pattern, start, self.spec.window).ok()? as u64;
        let in_window: Vec<&LogEvent> = events
            .iter()
            .filter(|e| e.timestamp < start + self.spec.window)
            .collect();
        let span = match (in_window.first(), in_window.last()) {
            (Some(a), Some(b)) if in_window.len() >= 2 => b.timestamp - a.timestamp,
            _ => self.spec.window,
        };
        Some(ClosedWindow {
            window: MetricWindow {
                metric: self.spec.name.clone(),
                x_count,
                t_interval: span.max(MIN_INTERVAL),
                x_bounds: self.spec.x_bounds,
                t_bounds: self.spec.t_bounds,
            },
            start,
            last_event: in_window.last().map(|e| (*e).clone()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(ts: f64, text: &str) -> LogEvent {
        LogEvent {
            timestamp: ts,
            session_id: "s".into(),
            text: text.into(),
        }
    }

    #[test]
    fn normalize_examples() {
        assert!((normalize(4.0, 0.0, 20.0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(normalize(0.0, 0.0, 20.0).unwrap(), 0.0);
        assert_eq!(normalize(20.0, 0.0, 20.0).unwrap(), 1.0);
        // 25/20 = 1.25 before clamping
        assert_eq!(normalize(25.0, 0.0, 20.0).unwrap(), 1.0);
        assert!(normalize(1.0, 5.0, 5.0).is_err());
    }

    #[test]
    fn count_in_window() {
        let re = Regex::new("login failed").unwrap();
        assert_eq!(count_pattern(&[], &re, 0.0, 10.0).unwrap(), 0);
        let mut log: Vec<LogEvent> = (0..7).map(|i| ev(100.0 + i as f64, "login failed")).collect();
        log.extend([
            ev(50.0, "login failed"),
            ev(120.0, "login failed"),
            ev(99.9, "login failed"),
        ]);
        log.push(ev(101.0, "login ok"));
        assert_eq!(count_pattern(&log, &re, 100.0, 10.0).unwrap(), 7);
        // half-open: an event at exactly start + length is outside
        log.push(ev(110.0, "login failed"));
        assert_eq!(count_pattern(&log, &re, 100.0, 10.0).unwrap(), 7);
        assert!(count_pattern(&log, &re, 0.0, 0.0).is_err());
    }

    fn stream() -> MetricStream {
        MetricStream::new(MetricSpec {
            name: "m".into(),
            pattern: Regex::new("hit").unwrap(),
            x_bounds: (0.0, 10.0),
            t_bounds: (0.0, 60.0),
            window: 60.0,
        })
    }

    #[test]
    fn window_closes_on_later_event() {
        let mut s = stream();
        assert!(s.observe(ev(0.0, "miss")).is_none());
        assert!(s.observe(ev(10.0, "hit")).is_none());
        assert!(s.observe(ev(12.5, "hit")).is_none());
        assert!(s.observe(ev(30.0, "miss")).is_none());
        let closed = s.observe(ev(70.0, "hit")).unwrap();
        assert_eq!(closed.start, 10.0);
        assert_eq!(closed.window.x_count, 2);
        assert_eq!(closed.window.t_interval, 2.5);
        assert_eq!(closed.last_event.unwrap().timestamp, 12.5);
        // the triggering hit opened the next window
        let next = s.flush().unwrap();
        assert_eq!(next.window.x_count, 1);
        assert_eq!(next.window.t_interval, 60.0);
        assert!(s.flush().is_none());
    }
}
