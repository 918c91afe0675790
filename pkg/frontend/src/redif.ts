// Parser for the board's line-oriented record export format. Each record is
// one template: "Key: value" lines, templates separated by a blank line.
// Keys are case-insensitive; several fields repeat (authors, keywords,
// comments, classification codes).

export interface RedifRecord {
  fields: Map<string, string[]>;
}

const LINE_RE = /^([A-Za-z][A-Za-z0-9-]*):\s?(.*)$/;

export function parseRedif(text: string): RedifRecord[] {
  const records: RedifRecord[] = [];
  for (const chunk of text.split(/\n\s*\n/)) {
    if (!chunk.trim()) continue;
    const fields = new Map<string, string[]>();
    for (const line of chunk.split("\n")) {
      if (!line.trim()) continue;
      const m = LINE_RE.exec(line);
      if (!m) continue;
      const key = m[1].toLowerCase();
      const values = fields.get(key) ?? [];
      values.push(m[2]);
      fields.set(key, values);
    }
    if (fields.size > 0) records.push({ fields });
  }
  return records;
}

export function firstField(record: RedifRecord, name: string): string | undefined {
  return record.fields.get(name.toLowerCase())?.[0];
}

export function allFields(record: RedifRecord, name: string): string[] {
  return record.fields.get(name.toLowerCase()) ?? [];
}

// Grade averages appear as one "avg-<dimension>" field per dimension.
export function gradeAverages(record: RedifRecord): Map<string, string> {
  const averages = new Map<string, string>();
  for (const [key, values] of record.fields) {
    if (key.startsWith("avg-") && values.length > 0) {
      averages.set(key.slice(4), values[0]);
    }
  }
  return averages;
}
