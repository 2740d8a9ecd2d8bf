/// Fixed-latency main memory behind a single channel of limited bandwidth.
///
/// A request starting at `start` completes at
/// `max(start + latency, channel_free) + ceil(bytes / bytes_per_cycle)`,
/// and the channel is busy until then.
#[derive(Clone, Debug)]
pub struct MainMemory {
    latency: u64,
    bytes_per_cycle: u64,
    channel_free: u64,
    next_id: u64,
    in_flight: Vec<MemResponse>,
    pub bytes_read: u64,
    pub bytes_written: u64,
    log: Option<Vec<MemRequest>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemRequest {
    pub id: u64,
    pub addr: u32,
    pub bytes: u32,
    pub is_write: bool,
    pub issue_cycle: u64,
    pub ready_cycle: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemResponse {
    pub id: u64,
    pub addr: u32,
    pub ready_cycle: u64,
}

impl MainMemory {
    pub fn new(latency: u64, bytes_per_cycle: u64) -> Self {
        MainMemory {
            latency,
            bytes_per_cycle,
            channel_free: 0,
            next_id: 0,
            in_flight: Vec::new(),
            bytes_read: 0,
            bytes_written: 0,
            log: None,
        }
    }

    /// Starts recording every request (for trace-based checks).
    pub fn record_requests(&mut self) {
        self.log.get_or_insert_with(Vec::new);
    }

    pub fn request_log(&self) -> &[MemRequest] {
        self.log.as_deref().unwrap_or(&[])
    }

    /// Queues a transfer and returns its response (id and completion cycle).
    pub fn submit(&mut self, addr: u32, bytes: u32, is_write: bool, start: u64) -> MemResponse {
        let transfer = (bytes as u64).div_ceil(self.bytes_per_cycle);
        let ready_cycle = (start + self.latency).max(self.channel_free) + transfer;
        self.channel_free = ready_cycle;
        let id = self.next_id;
        self.next_id += 1;
        if is_write {
            self.bytes_written += bytes as u64;
        } else {
            self.bytes_read += bytes as u64;
        }
        if let Some(log) = &mut self.log {
            log.push(MemRequest { id, addr, bytes, is_write, issue_cycle: start, ready_cycle });
        }
        let resp = MemResponse { id, addr, ready_cycle };
        self.in_flight.push(resp);
        resp
    }

    /// Removes and returns the responses complete by `now`, oldest first.
    pub fn tick(&mut self, now: u64) -> Vec<MemResponse> {
        let (done, pending): (Vec<_>, Vec<_>) = self.in_flight.iter().partition(|r| r.ready_cycle <= now);
        self.in_flight = pending;
        done
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.len()
    }
}
