use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use crate::session::Service;

/// Accepts connections forever, one thread per connection. Each request
/// line gets exactly one response line.
pub fn serve(listener: TcpListener, service: Arc<Service>) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let service = Arc::clone(&service);
        thread::spawn(move || {
            let _ = handle_connection(stream, &service);
        });
    }
    Ok(())
}

pub fn handle_connection(stream: TcpStream, service: &Service) -> io::Result<()> {
    let reader = BufReader::new(stream.try_clone()?);
    let mut out = stream;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = service.handle_line(&line);
        out.write_all(reply.as_bytes())?;
        out.write_all(b"\n")?;
        out.flush()?;
    }
    Ok(())
}
