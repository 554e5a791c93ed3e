// Pure formatting and validation helpers. The service enforces every real
// precondition; the client only pre-validates shapes before sending.

const ADDRESS_RE = /^0x[0-9a-fA-F]{40}$/;
const ETHER_RE = /^[0-9]+(\.[0-9]{1,18})?$/;

export function isAddress(text: string): boolean {
  return ADDRESS_RE.test(text);
}

export function canonicalAddress(text: string): string {
  if (!isAddress(text)) {
    throw new Error(`not an address: ${text}`);
  }
  return text.toLowerCase();
}

export function shortAddress(addr: string): string {
  return addr.length > 12 ? `${addr.slice(0, 8)}…${addr.slice(-4)}` : addr;
}

export function isEtherAmount(text: string): boolean {
  return ETHER_RE.test(text);
}

export function formatCountdown(secondsLeft: number): string {
  if (secondsLeft <= 0) {
    return "ended";
  }
  const hours = Math.floor(secondsLeft / 3600);
  const minutes = Math.floor((secondsLeft % 3600) / 60);
  const seconds = secondsLeft % 60;
  const mm = String(minutes).padStart(2, "0");
  const ss = String(seconds).padStart(2, "0");
  return hours > 0 ? `${hours}h ${mm}m ${ss}s` : `${minutes}m ${ss}s`;
}

export function formatTimestamp(seconds: number): string {
  return new Date(seconds * 1000).toISOString().replace("T", " ").replace(".000Z", " UTC");
}
